#pragma once

#include <memory>
#include <unordered_map>
#include <vector>

#include "vx/core/index.hpp"
#include "vx/core/metric_io.hpp"
#include "vx/core/topk.hpp"
#include "vx/quantize/codec.hpp"
#include "vx/quantize/codec_io.hpp"

namespace vx {

/// Flat scan over compressed codes (the PQ, SQ, RQ, LSQ and PRQ indexes).
class CodecFlatIndex : public Index {
public:
    CodecFlatIndex(std::unique_ptr<Codec> codec, Metric metric = Metric::l2())
        : Index(codec->d(), metric), codec_(std::move(codec)) {
        is_trained_ = codec_->is_trained();
    }

    std::string type_name() const override { return "CodecFlatIndex"; }

    const Codec& codec() const { return *codec_; }
    Codec& codec() { return *codec_; }
    std::span<const std::uint8_t> codes() const { return codes_; }

    void train(const VectorSet& x) override {
        detail::require_dim(x.d, d_, "train");
        codec_->train(x);
        is_trained_ = true;
    }

    void add_with_ids(const VectorSet& x, std::span<const idx_t> ids) override {
        check_addable(x, ids);
        for (size_t i = 0; i < ids.size(); ++i) {
            detail::require_arg(!row_of_.contains(ids[i]), "duplicate id " + std::to_string(ids[i]));
            row_of_.emplace(ids[i], ntotal_ + i);
        }
        auto c = codec_->compute_codes(x);
        codes_.insert(codes_.end(), c.begin(), c.end());
        ids_.insert(ids_.end(), ids.begin(), ids.end());
        ntotal_ += x.n;
    }

    SearchResult search(const VectorSet& q, size_t k, const SearchParams& params = {}) const override {
        check_searchable(q, k);
        SearchResult out(q.n, k, metric_.worst_value());
        const size_t cs = codec_->code_size();
        parallel_for(q.n, [&](size_t qi) {
            auto dis = codec_->distance_computer(metric_);
            dis->set_query(q.ptr(qi));
            TopKHeap heap(k, metric_.higher_is_better());
            for (size_t i = 0; i < ntotal_; ++i) {
                if (params.selector && !params.selector->is_member(ids_[i])) continue;
                heap.push((*dis)(codes_.data() + i * cs), ids_[i]);
            }
            heap.write_sorted(out.ids_of(qi), out.distances_of(qi), metric_.worst_value());
        });
        return out;
    }

    std::vector<float> reconstruct(idx_t id) const override {
        auto it = row_of_.find(id);
        detail::require(it != row_of_.end(), ErrorKind::NotFound, "id " + std::to_string(id) + " not stored");
        std::vector<float> v(d_);
        codec_->decode_one(codes_.data() + it->second * codec_->code_size(), v.data());
        return v;
    }

    size_t remove_ids(std::span<const idx_t> ids) override {
        const size_t cs = codec_->code_size();
        size_t removed = 0;
        for (idx_t id : ids) {
            auto it = row_of_.find(id);
            if (it == row_of_.end()) continue;
            size_t row = it->second, last = ntotal_ - 1;
            row_of_.erase(it);
            if (row != last) {
                std::copy(codes_.begin() + last * cs, codes_.begin() + (last + 1) * cs, codes_.begin() + row * cs);
                ids_[row] = ids_[last];
                row_of_[ids_[row]] = row;
            }
            codes_.resize(last * cs);
            ids_.pop_back();
            --ntotal_;
            ++removed;
        }
        return removed;
    }

    void reset() override {
        codes_.clear();
        ids_.clear();
        row_of_.clear();
        ntotal_ = 0;
    }

    void write(ByteWriter& w) const override {
        w.section("CODX", [&](ByteWriter& s) {
            detail::write_metric(s, metric_);
            codec_->write(s);
            s.put<std::uint64_t>(ntotal_);
            s.put_vector(codes_);
            s.put_vector(ids_);
        });
    }

    static std::unique_ptr<CodecFlatIndex> read_body(ByteReader& r) {
        Metric m = detail::read_metric(r);
        auto idx = std::make_unique<CodecFlatIndex>(read_codec(r), m);
        auto n = r.get<std::uint64_t>();
        idx->codes_ = r.get_vector<std::uint8_t>();
        idx->ids_ = r.get_vector<idx_t>();
        if (idx->ids_.size() != n || idx->codes_.size() != n * idx->codec_->code_size()) {
            throw Error(ErrorKind::Format, "codec index payload size mismatch");
        }
        idx->ntotal_ = n;
        for (size_t i = 0; i < n; ++i) idx->row_of_.emplace(idx->ids_[i], i);
        return idx;
    }

private:
    std::unique_ptr<Codec> codec_;
    std::vector<std::uint8_t> codes_;
    std::vector<idx_t> ids_;
    std::unordered_map<idx_t, size_t> row_of_;
};

} // namespace vx
