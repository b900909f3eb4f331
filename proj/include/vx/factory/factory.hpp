#pragma once

#include <charconv>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vx/core/index.hpp"
#include "vx/core/refine.hpp"
#include "vx/flat/flat_index.hpp"
#include "vx/graph/hnsw.hpp"
#include "vx/ivf/ivf_index.hpp"
#include "vx/quantize/additive.hpp"
#include "vx/quantize/codec_index.hpp"
#include "vx/quantize/product.hpp"
#include "vx/quantize/product_additive.hpp"
#include "vx/quantize/scalar.hpp"
#include "vx/transform/linear_transform.hpp"
#include "vx/transform/pretransform_index.hpp"

namespace vx {

/// Every default the factory fills in that the string does not spell out.
struct FactoryDefaults {
    size_t hnsw_m = 32;               // HNSW{M} and IVF{K}_HNSW{M} when M is omitted
    size_t ivf_nprobe = 1;
    bool ivf_by_residual = true;      // codes encode residuals to the list centroid
    size_t hnsw_ef_construction = 40;
    size_t hnsw_ef_search = 16;
    size_t refine_k_factor = 4;       // RFlat shortlist = k_factor * k
    std::uint64_t rotation_seed = 1234;
    AdditiveCodec::NormMode additive_norm = AdditiveCodec::NormMode::StoredF32;
    AdditiveCodec::NormMode prq_sub_norm = AdditiveCodec::NormMode::FromLUT;
};

inline constexpr FactoryDefaults kFactoryDefaults{};

enum class CodecKind : std::uint8_t { Flat, PQ, SQ, RQ, LSQ, PRQ };

struct CodecSpec {
    CodecKind kind = CodecKind::Flat;
    size_t s = 0;      // PRQ splits
    size_t m = 0;      // codebooks (PQ/RQ/LSQ/PRQ sub-codebooks)
    unsigned bits = 0; // bits per code (SQ: bits per component)
    friend bool operator==(const CodecSpec&, const CodecSpec&) = default;
};

struct TransformSpec {
    enum class Kind : std::uint8_t { PCA, RR } kind = Kind::PCA;
    size_t d_out = 0;  // 0 for RR without an explicit dimension
    friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

struct FactorySpec {
    enum class Main : std::uint8_t { Flat, IVF, HNSW, Codec } main = Main::Flat;
    std::vector<TransformSpec> transforms;
    size_t nlist = 0;
    bool ivf_hnsw = false;
    size_t hnsw_m = 0;
    /// IVF list encoding or the flat codec of a Codec main stage.
    CodecSpec codec;
    bool refine = false;
    friend bool operator==(const FactorySpec&, const FactorySpec&) = default;
};

/// Syntax error at a byte offset of the factory string.
class FactoryParseError : public Error {
public:
    FactoryParseError(size_t pos, const std::string& what)
        : Error(ErrorKind::InvalidArgument, "factory string, position " + std::to_string(pos) + ": " + what),
          position_(pos) {}
    size_t position() const { return position_; }

private:
    size_t position_;
};

namespace detail {

class FactoryParser {
public:
    explicit FactoryParser(std::string_view s) : s_(s) {}

    FactorySpec parse() {
        FactorySpec spec;
        if (s_.empty()) fail("empty factory string");
        while (peek("PCA") || peek("RR")) {
            spec.transforms.push_back(transform());
            comma("an index stage");
        }
        main(spec);
        if (!done()) {
            if (s_[pos_] != ',') fail("expected ',' or end of string");
            ++pos_;
            if (spec.main == FactorySpec::Main::IVF && !peek("RFlat")) {
                spec.codec = encoding(true);
                if (!done()) {
                    if (s_[pos_] != ',') fail("expected ',' or end of string");
                    ++pos_;
                    refine_suffix(spec);
                }
            } else {
                refine_suffix(spec);
            }
        }
        if (!done()) fail("unexpected trailing characters");
        return spec;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw FactoryParseError(pos_, msg); }

    bool done() const { return pos_ >= s_.size(); }
    bool peek(std::string_view kw) const { return s_.substr(pos_, kw.size()) == kw; }
    bool eat(std::string_view kw) {
        if (!peek(kw)) return false;
        pos_ += kw.size();
        return true;
    }
    bool at_digit() const { return !done() && s_[pos_] >= '0' && s_[pos_] <= '9'; }

    size_t number(const char* what) {
        if (!at_digit()) fail(std::string("expected ") + what);
        size_t start = pos_;
        while (at_digit()) ++pos_;
        size_t v = 0;
        auto [p, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        (void)p;
        if (ec != std::errc() || v > (size_t{1} << 31)) {
            pos_ = start;
            fail(std::string(what) + " is out of range");
        }
        if (v == 0) {
            pos_ = start;
            fail(std::string(what) + " must be positive");
        }
        return v;
    }

    void comma(const char* next) {
        if (done() || s_[pos_] != ',') fail(std::string("expected ',' followed by ") + next);
        ++pos_;
    }

    TransformSpec transform() {
        TransformSpec t;
        if (eat("PCA")) {
            t.kind = TransformSpec::Kind::PCA;
            t.d_out = number("PCA output dimension");
        } else {
            eat("RR");
            t.kind = TransformSpec::Kind::RR;
            if (at_digit()) t.d_out = number("rotation output dimension");
        }
        return t;
    }

    void main(FactorySpec& spec) {
        if (eat("Flat")) {
            spec.main = FactorySpec::Main::Flat;
        } else if (eat("IVF")) {
            spec.main = FactorySpec::Main::IVF;
            spec.nlist = number("IVF list count");
            if (eat("_HNSW")) {
                spec.ivf_hnsw = true;
                spec.hnsw_m = at_digit() ? number("HNSW M") : kFactoryDefaults.hnsw_m;
            } else if (!done() && s_[pos_] == '_') {
                fail("expected '_HNSW'");
            }
        } else if (eat("HNSW")) {
            spec.main = FactorySpec::Main::HNSW;
            spec.hnsw_m = at_digit() ? number("HNSW M") : kFactoryDefaults.hnsw_m;
        } else {
            spec.main = FactorySpec::Main::Codec;
            spec.codec = encoding(false);
        }
    }

    CodecSpec encoding(bool allow_flat) {
        CodecSpec c;
        if (allow_flat && eat("Flat")) {
            c.kind = CodecKind::Flat;
        } else if (eat("PQ")) {
            c.kind = CodecKind::PQ;
            c.m = number("PQ sub-quantizer count");
            bits_suffix(c);
        } else if (eat("SQ")) {
            c.kind = CodecKind::SQ;
            size_t at = pos_;
            size_t b = number("SQ bit width");
            if (b != 4 && b != 6 && b != 8) {
                pos_ = at;
                fail("SQ bit width must be 4, 6 or 8");
            }
            c.bits = static_cast<unsigned>(b);
        } else if (eat("RQ")) {
            c.kind = CodecKind::RQ;
            c.m = number("RQ codebook count");
            bits_suffix(c);
        } else if (eat("LSQ")) {
            c.kind = CodecKind::LSQ;
            c.m = number("LSQ codebook count");
            bits_suffix(c);
        } else if (eat("PRQ")) {
            c.kind = CodecKind::PRQ;
            c.s = number("PRQ split count");
            if (!eat("x")) fail("expected 'x'");
            c.m = number("PRQ codebook count");
            bits_suffix(c);
        } else {
            fail(allow_flat ? "expected an encoding (Flat, PQ, SQ, RQ, LSQ or PRQ)"
                            : "expected an index stage (Flat, IVF, HNSW, PQ, SQ, RQ, LSQ or PRQ)");
        }
        return c;
    }

    void bits_suffix(CodecSpec& c) {
        if (!eat("x")) fail("expected 'x'");
        size_t at = pos_;
        size_t b = number("bit width");
        if (b > 16) {
            pos_ = at;
            fail("bit width must be at most 16");
        }
        c.bits = static_cast<unsigned>(b);
    }

    void refine_suffix(FactorySpec& spec) {
        if (!eat("RFlat")) fail("expected 'RFlat'");
        spec.refine = true;
    }

    std::string_view s_;
    size_t pos_ = 0;
};

inline std::string render_codec(const CodecSpec& c) {
    auto mb = [&] { return std::to_string(c.m) + "x" + std::to_string(c.bits); };
    switch (c.kind) {
        case CodecKind::Flat: return "Flat";
        case CodecKind::PQ: return "PQ" + mb();
        case CodecKind::SQ: return "SQ" + std::to_string(c.bits);
        case CodecKind::RQ: return "RQ" + mb();
        case CodecKind::LSQ: return "LSQ" + mb();
        case CodecKind::PRQ: return "PRQ" + std::to_string(c.s) + "x" + mb();
    }
    return {};
}

inline std::unique_ptr<Codec> build_codec(const CodecSpec& c, size_t d) {
    using V = AdditiveCodec::Variant;
    switch (c.kind) {
        case CodecKind::Flat: return nullptr;
        case CodecKind::PQ: return std::make_unique<ProductCodec>(d, c.m, c.bits);
        case CodecKind::SQ: return std::make_unique<ScalarCodec>(d, c.bits);
        case CodecKind::RQ:
            return std::make_unique<AdditiveCodec>(d, c.m, c.bits, V::Residual, kFactoryDefaults.additive_norm);
        case CodecKind::LSQ:
            return std::make_unique<AdditiveCodec>(d, c.m, c.bits, V::LocalSearch, kFactoryDefaults.additive_norm);
        case CodecKind::PRQ:
            return std::make_unique<ProductAdditiveCodec>(d, c.s, c.m, c.bits, V::Residual,
                                                          kFactoryDefaults.prq_sub_norm);
    }
    return nullptr;
}

inline CodecSpec codec_spec_of(const Codec& codec) {
    CodecSpec c;
    if (dynamic_cast<const RawCodec*>(&codec)) {
        c.kind = CodecKind::Flat;
    } else if (auto* pq = dynamic_cast<const ProductCodec*>(&codec)) {
        c = {CodecKind::PQ, 0, pq->m(), pq->nbits()};
    } else if (auto* sq = dynamic_cast<const ScalarCodec*>(&codec)) {
        c = {CodecKind::SQ, 0, 0, sq->bits()};
    } else if (auto* aq = dynamic_cast<const AdditiveCodec*>(&codec)) {
        c = {aq->variant() == AdditiveCodec::Variant::Residual ? CodecKind::RQ : CodecKind::LSQ, 0, aq->m(), aq->nbits()};
    } else if (auto* prq = dynamic_cast<const ProductAdditiveCodec*>(&codec)) {
        c = {CodecKind::PRQ, prq->s(), prq->sub(0).m(), prq->sub(0).nbits()};
    } else {
        throw Error(ErrorKind::Unsupported, codec.type_name() + " has no factory form");
    }
    return c;
}

} // namespace detail

/// Grammar, stages separated by commas:
///   { PCA<d> | RR[<d>] } main [ ,RFlat ]
///   main     := Flat | HNSW[<M>] | codec | IVF<K>[_HNSW[<M>]] [ ,encoding ]
///   encoding := Flat | codec
///   codec    := PQ<M>x<b> | SQ<4|6|8> | RQ<M>x<b> | LSQ<M>x<b> | PRQ<S>x<M>x<b>
inline FactorySpec parse_factory_spec(std::string_view s) { return detail::FactoryParser(s).parse(); }

/// Canonical string: IVF always names its encoding and HNSW its M.
inline std::string render_factory(const FactorySpec& spec) {
    std::string out;
    for (const auto& t : spec.transforms) {
        if (t.kind == TransformSpec::Kind::PCA) out += "PCA" + std::to_string(t.d_out) + ",";
        else out += "RR" + (t.d_out ? std::to_string(t.d_out) : std::string()) + ",";
    }
    switch (spec.main) {
        case FactorySpec::Main::Flat: out += "Flat"; break;
        case FactorySpec::Main::HNSW: out += "HNSW" + std::to_string(spec.hnsw_m); break;
        case FactorySpec::Main::Codec: out += detail::render_codec(spec.codec); break;
        case FactorySpec::Main::IVF:
            out += "IVF" + std::to_string(spec.nlist);
            if (spec.ivf_hnsw) out += "_HNSW" + std::to_string(spec.hnsw_m);
            out += "," + detail::render_codec(spec.codec);
            break;
    }
    if (spec.refine) out += ",RFlat";
    return out;
}

/// Untrained index for `spec` over d-dimensional input.
inline std::unique_ptr<Index> build_index(const FactorySpec& spec, size_t d, Metric metric = Metric::l2()) {
    detail::require_arg(d >= 1, "factory dimension must be >= 1");
    std::vector<LinearTransform> chain;
    size_t dc = d;
    for (const auto& t : spec.transforms) {
        if (t.kind == TransformSpec::Kind::PCA) {
            detail::require_arg(t.d_out <= dc, "PCA" + std::to_string(t.d_out) + " exceeds the input dimension " +
                                                   std::to_string(dc));
            chain.push_back(LinearTransform::pca_untrained(dc, t.d_out));
            dc = t.d_out;
        } else {
            size_t out = t.d_out ? t.d_out : dc;
            detail::require_arg(out <= dc, "RR" + std::to_string(out) + " exceeds the input dimension " +
                                               std::to_string(dc));
            chain.push_back(random_rotation(dc, kFactoryDefaults.rotation_seed, out));
            dc = out;
        }
    }
    std::unique_ptr<Index> core;
    switch (spec.main) {
        case FactorySpec::Main::Flat: core = std::make_unique<FlatIndex>(dc, metric); break;
        case FactorySpec::Main::HNSW: {
            auto h = std::make_unique<HnswIndex>(dc, spec.hnsw_m, metric);
            h->ef_construction = kFactoryDefaults.hnsw_ef_construction;
            h->ef_search = kFactoryDefaults.hnsw_ef_search;
            core = std::move(h);
            break;
        }
        case FactorySpec::Main::Codec:
            core = std::make_unique<CodecFlatIndex>(detail::build_codec(spec.codec, dc), metric);
            break;
        case FactorySpec::Main::IVF: {
            auto ivf = std::make_unique<IvfIndex>(dc, spec.nlist, detail::build_codec(spec.codec, dc), metric,
                                                  spec.ivf_hnsw ? IvfIndex::Coarse::Hnsw : IvfIndex::Coarse::Flat,
                                                  spec.ivf_hnsw ? spec.hnsw_m : kFactoryDefaults.hnsw_m);
            ivf->by_residual = kFactoryDefaults.ivf_by_residual;
            ivf->nprobe = kFactoryDefaults.ivf_nprobe;
            core = std::move(ivf);
            break;
        }
    }
    if (!chain.empty()) core = std::make_unique<PreTransformIndex>(std::move(chain), std::move(core));
    if (spec.refine) {
        auto r = std::make_unique<RefineIndex>(std::move(core), std::make_unique<FlatIndex>(d, metric));
        r->k_factor = kFactoryDefaults.refine_k_factor;
        core = std::move(r);
    }
    return core;
}

inline std::unique_ptr<Index> parse_factory(std::string_view s, size_t d, Metric metric = Metric::l2()) {
    return build_index(parse_factory_spec(s), d, metric);
}

/// Recovers the factory structure of an index; throws Unsupported for
/// configurations the grammar cannot express.
inline FactorySpec factory_spec_of(const Index& index) {
    FactorySpec spec;
    const Index* cur = &index;
    if (auto* r = dynamic_cast<const RefineIndex*>(cur)) {
        detail::require(dynamic_cast<const FlatIndex*>(&r->exact()) != nullptr, ErrorKind::Unsupported,
                        "only flat refinement has a factory form");
        spec.refine = true;
        cur = &r->base();
    }
    if (auto* p = dynamic_cast<const PreTransformIndex*>(cur)) {
        for (const auto& t : p->chain()) {
            if (t.kind() == LinearTransform::Kind::PCA) spec.transforms.push_back({TransformSpec::Kind::PCA, t.d_out()});
            else if (t.kind() == LinearTransform::Kind::RandomRotation)
                spec.transforms.push_back({TransformSpec::Kind::RR, t.d_out() == t.d_in() ? 0 : t.d_out()});
            else throw Error(ErrorKind::Unsupported, "generic linear transforms have no factory form");
        }
        cur = &p->sub();
    }
    if (dynamic_cast<const FlatIndex*>(cur)) {
        spec.main = FactorySpec::Main::Flat;
    } else if (auto* h = dynamic_cast<const HnswIndex*>(cur)) {
        spec.main = FactorySpec::Main::HNSW;
        spec.hnsw_m = h->m();
    } else if (auto* c = dynamic_cast<const CodecFlatIndex*>(cur)) {
        spec.main = FactorySpec::Main::Codec;
        spec.codec = detail::codec_spec_of(c->codec());
    } else if (auto* ivf = dynamic_cast<const IvfIndex*>(cur)) {
        spec.main = FactorySpec::Main::IVF;
        spec.nlist = ivf->nlist();
        spec.ivf_hnsw = ivf->coarse_kind() == IvfIndex::Coarse::Hnsw;
        spec.hnsw_m = spec.ivf_hnsw ? ivf->hnsw_m() : 0;
        spec.codec = detail::codec_spec_of(ivf->codec());
    } else {
        throw Error(ErrorKind::Unsupported, cur->type_name() + " has no factory form");
    }
    return spec;
}

inline std::string render_factory(const Index& index) { return render_factory(factory_spec_of(index)); }

} // namespace vx
