// Benchmark harness: dataset generation, ground truth, evaluation, sweeps,
// codec evaluation, cost-model validation and scaling fits.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vx/bench/eval.hpp"
#include "vx/bench/report.hpp"
#include "vx/bench/synth.hpp"
#include "vx/bench/vecs_io.hpp"
#include "vx/core/parallel.hpp"
#include "vx/factory/factory.hpp"
#include "vx/filter/words.hpp"
#include "vx/quantize/codec_index.hpp"

namespace {

using vx::Table;

struct Output {
    std::string format = "csv";
    std::string path;

    void emit(const Table& t) const {
        std::ofstream file;
        std::ostream* os = &std::cout;
        if (!path.empty()) {
            file.open(path);
            if (!file) throw vx::Error(vx::ErrorKind::Io, "cannot open '" + path + "'");
            os = &file;
        }
        if (format == "csv") t.write_csv(*os);
        else if (format == "jsonl") t.write_jsonl(*os);
        else if (format == "dat") t.write_dat(*os);
        else throw vx::Error(vx::ErrorKind::InvalidArgument, "unknown output format '" + format + "'");
    }
};

void add_output_flags(CLI::App* app, Output& out) {
    app->add_option("--format", out.format, "Output format: csv, jsonl or dat")
        ->check(CLI::IsMember({"csv", "jsonl", "dat"}))
        ->capture_default_str();
    app->add_option("--out", out.path, "Output file (default: stdout)");
}

vx::Metric parse_metric(const std::string& s) {
    auto k = vx::parse_metric_kind(s);
    if (!k) throw vx::Error(vx::ErrorKind::InvalidArgument, "unknown metric '" + s + "'");
    return vx::Metric(*k);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) v.push_back(std::stod(item));
    }
    return v;
}

std::vector<size_t> parse_size_list(const std::string& s) {
    std::vector<size_t> v;
    for (double x : parse_list(s)) v.push_back(static_cast<size_t>(std::llround(x)));
    return v;
}

/// Either files (--base/--queries/--train/--gt) or a synthetic dataset.
struct DataFlags {
    std::string base, queries, train, gt;
    std::string kind = "gaussian";
    size_t n = 10000, d = 32, nq = 1000, ntrain = 0;
    std::uint64_t seed = 0;
    std::string metric;

    void add(CLI::App* app) {
        app->add_option("--base", base, "Database vectors (.fvecs/.bvecs)");
        app->add_option("--queries", queries, "Query vectors (.fvecs/.bvecs)");
        app->add_option("--train", train, "Training vectors (default: base)");
        app->add_option("--gt", gt, "Ground truth (.ivecs); computed when absent");
        app->add_option("--kind", kind, "Synthetic kind: gaussian, uniform, blobs, skewed-norm-mips")->capture_default_str();
        app->add_option("--n", n, "Synthetic database size")->capture_default_str();
        app->add_option("--d", d, "Synthetic dimension")->capture_default_str();
        app->add_option("--nq", nq, "Synthetic query count")->capture_default_str();
        app->add_option("--ntrain", ntrain, "Synthetic training set size (0: base)")->capture_default_str();
        app->add_option("--seed", seed, "Synthetic seed")->capture_default_str();
        app->add_option("--metric", metric, "Metric (L2, IP, L1, ...; default L2, IP for MIPS data)");
    }

    vx::Dataset load(size_t gt_k = 100) const {
        vx::Dataset ds;
        if (!base.empty()) {
            if (queries.empty()) throw vx::Error(vx::ErrorKind::InvalidArgument, "--base requires --queries");
            ds.base = vx::load_vectors(base);
            ds.queries = vx::load_vectors(queries);
            ds.train = train.empty() ? ds.base : vx::load_vectors(train);
        } else {
            vx::SynthParams p;
            p.nq = nq;
            p.ntrain = ntrain;
            ds = vx::synth_dataset(vx::parse_synth_kind(kind), n, d, seed, p);
        }
        if (!metric.empty()) ds.metric = parse_metric(metric);
        if (!gt.empty()) ds.ground_truth = vx::matrix_to_ids(vx::load_ivecs(gt));
        else vx::attach_ground_truth(ds, gt_k);
        return ds;
    }
};

std::vector<vx::Table::Cell> eval_cells(const vx::EvalRow& r, const std::string& label) {
    return {label, r.r1_at_1, r.r1_at_10, r.r1_at_100, r.r10_at_10, r.r100_at_100, r.qps, r.ndis_per_query,
            r.p50_ms, r.p95_ms, r.p99_ms, static_cast<double>(r.memory_bytes), static_cast<double>(r.code_size)};
}

const std::vector<std::string> kEvalColumns = {"setting", "1-R@1", "1-R@10", "1-R@100", "10-R@10", "100-R@100",
                                               "qps", "ndis", "p50_ms", "p95_ms", "p99_ms", "memory_bytes",
                                               "code_size"};

std::string label_of(const std::map<std::string, double>& v) {
    std::string s;
    for (const auto& [k, x] : v) {
        std::ostringstream os;
        os << k << "=" << x;
        s += (s.empty() ? "" : " ") + os.str();
    }
    return s.empty() ? "default" : s;
}

std::unique_ptr<vx::Index> build_trained(const std::string& spec, const vx::Dataset& ds) {
    auto idx = vx::parse_factory(spec, ds.base.d, ds.metric);
    idx->train(ds.train);
    idx->add(ds.base);
    return idx;
}

/// "name=v1,v2,..." into an axis.
vx::Axis parse_axis(const std::string& s) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw vx::Error(vx::ErrorKind::InvalidArgument, "axis must be name=v1,v2,...: " + s);
    return {s.substr(0, eq), parse_list(s.substr(eq + 1))};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vector index benchmark harness"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (0: OpenMP default)");
    bool parallel = false;
    app.add_flag("--parallel", parallel, "Allow concurrent evaluation (recall-only runs)");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset as .fvecs files");
    DataFlags synth_flags;
    std::string prefix = "synth";
    synth->add_option("--kind", synth_flags.kind, "gaussian, uniform, blobs or skewed-norm-mips")->capture_default_str();
    synth->add_option("--n", synth_flags.n, "Database size")->capture_default_str();
    synth->add_option("--d", synth_flags.d, "Dimension")->capture_default_str();
    synth->add_option("--nq", synth_flags.nq, "Query count")->capture_default_str();
    synth->add_option("--ntrain", synth_flags.ntrain, "Training set size (0: none written)")->capture_default_str();
    synth->add_option("--seed", synth_flags.seed, "Seed")->capture_default_str();
    synth->add_option("--prefix", prefix, "Output prefix: <prefix>_base.fvecs, _query.fvecs, _learn.fvecs")
        ->capture_default_str();

    // gt
    auto* gt = app.add_subcommand("gt", "Exact ground truth by flat search");
    std::string gt_base, gt_queries, gt_out = "gt.ivecs", gt_metric = "L2";
    size_t gt_k = 100;
    gt->add_option("--base", gt_base, "Database vectors")->required();
    gt->add_option("--queries", gt_queries, "Query vectors")->required();
    gt->add_option("--k", gt_k, "Neighbors per query")->capture_default_str();
    gt->add_option("--metric", gt_metric, "Metric")->capture_default_str();
    gt->add_option("--out", gt_out, "Output .ivecs file")->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "Recall, QPS, ndis and latency of one index");
    DataFlags eval_data;
    eval_data.add(eval);
    std::string eval_index = "Flat", eval_nprobe, eval_ef, eval_shortlist;
    size_t repeats = 5;
    Output eval_out;
    eval->add_option("--index", eval_index, "Factory string")->capture_default_str();
    eval->add_option("--nprobe", eval_nprobe, "Comma-separated nprobe values");
    eval->add_option("--ef", eval_ef, "Comma-separated efSearch values");
    eval->add_option("--shortlist", eval_shortlist, "Comma-separated refinement shortlist sizes");
    eval->add_option("--repeats", repeats, "Timed repeats (median reported)")->capture_default_str();
    add_output_flags(eval, eval_out);

    // sweep
    auto* sw = app.add_subcommand("sweep", "Pareto exploration over search-time axes");
    DataFlags sweep_data;
    sweep_data.add(sw);
    std::string sweep_index = "IVF64,Flat", measure = "1-R@1", sweep_json;
    std::vector<std::string> axes;
    std::uint64_t sweep_seed = 0;
    Output sweep_out;
    sw->add_option("--index", sweep_index, "Factory string")->capture_default_str();
    sw->add_option("--axis", axes, "Axis as name=v1,v2,... (nprobe, efSearch, shortlist); repeatable")->required();
    sw->add_option("--measure", measure, "Accuracy measure: 1-R@1, 1-R@10, 1-R@100, 10-R@10, 100-R@100")
        ->capture_default_str();
    sw->add_option("--explore-seed", sweep_seed, "Seed of the visiting order")->capture_default_str();
    sw->add_option("--json", sweep_json, "Also write evaluated points and frontier as JSON");
    sw->add_option("--repeats", repeats, "Timed repeats (median reported)")->capture_default_str();
    add_output_flags(sw, sweep_out);

    // codec-eval
    auto* ce = app.add_subcommand("codec-eval", "Reconstruction error, code size and recall of flat codecs");
    DataFlags codec_data;
    codec_data.add(ce);
    std::vector<std::string> codecs;
    Output codec_out;
    ce->add_option("--codec", codecs, "Codec factory strings (PQ8x8, SQ8, RQ4x8, ...); repeatable")->required();
    add_output_flags(ce, codec_out);

    // cost-model
    auto* cm = app.add_subcommand("cost-model", "Measured IVF distance counts against K + P*N/K");
    DataFlags cm_data;
    cm_data.kind = "uniform";
    cm_data.n = 50000;
    cm_data.d = 16;
    cm_data.nq = 200;
    cm_data.add(cm);
    std::string kgrid = "125,250,500,1000,2000", pgrid = "8";
    bool cm_check = false;
    Output cm_out;
    cm->add_option("--kgrid", kgrid, "Comma-separated nlist grid")->capture_default_str();
    cm->add_option("--pgrid", pgrid, "Comma-separated nprobe grid")->capture_default_str();
    cm->add_flag("--check", cm_check, "Fail unless the measured argmin is within one grid step of sqrt(P*N)");
    add_output_flags(cm, cm_out);

    // scaling
    auto* sc = app.add_subcommand("scaling", "Fit t = t0 * N^alpha to IVF search times");
    std::string sizes = "10000,30000,100000,300000", sc_kind = "gaussian";
    size_t sc_d = 16, sc_nq = 500;
    double target = 0.9;
    std::uint64_t sc_seed = 0;
    bool sc_check = false;
    Output sc_out;
    sc->add_option("--sizes", sizes, "Comma-separated database sizes")->capture_default_str();
    sc->add_option("--kind", sc_kind, "Synthetic kind")->capture_default_str();
    sc->add_option("--d", sc_d, "Dimension")->capture_default_str();
    sc->add_option("--nq", sc_nq, "Query count")->capture_default_str();
    sc->add_option("--target", target, "1-recall@1 target for nprobe tuning")->capture_default_str();
    sc->add_option("--seed", sc_seed, "Seed")->capture_default_str();
    sc->add_flag("--check", sc_check, "Fail unless alpha < 1");
    add_output_flags(sc, sc_out);

    // filter
    auto* fl = app.add_subcommand("filter", "Word-filtered search: planner choices and prefilter statistics");
    size_t f_n = 20000, f_d = 16, f_vocab = 200, f_words = 6, f_nq = 200;
    double f_p = 0.1, f_threshold = vx::kDefaultPlanThreshold;
    std::uint64_t f_seed = 0;
    Output f_out;
    fl->add_option("--n", f_n, "Items")->capture_default_str();
    fl->add_option("--d", f_d, "Dimension")->capture_default_str();
    fl->add_option("--vocab", f_vocab, "Vocabulary size")->capture_default_str();
    fl->add_option("--words", f_words, "Mean words per item")->capture_default_str();
    fl->add_option("--nq", f_nq, "Queries")->capture_default_str();
    fl->add_option("--p", f_p, "Signature bit probability")->capture_default_str();
    fl->add_option("--threshold", f_threshold, "Metadata-first threshold on S/N")->capture_default_str();
    fl->add_option("--seed", f_seed, "Seed")->capture_default_str();
    add_output_flags(fl, f_out);

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) vx::set_num_threads(threads);
    else if (!parallel && (*sw || *eval)) vx::set_num_threads(1);

    try {
        if (*synth) {
            vx::SynthParams p;
            p.nq = synth_flags.nq;
            p.ntrain = synth_flags.ntrain;
            auto ds = vx::synth_dataset(vx::parse_synth_kind(synth_flags.kind), synth_flags.n, synth_flags.d,
                                        synth_flags.seed, p);
            vx::save_fvecs(prefix + "_base.fvecs", ds.base);
            vx::save_fvecs(prefix + "_query.fvecs", ds.queries);
            if (synth_flags.ntrain) vx::save_fvecs(prefix + "_learn.fvecs", ds.train);
            if (!ds.labels.empty()) {
                vx::IdMatrix m{ds.labels.size(), 1, {}};
                for (auto l : ds.labels) m.data.push_back(static_cast<std::int32_t>(l));
                vx::save_ivecs(prefix + "_labels.ivecs", m);
            }
            std::cout << "wrote " << prefix << "_*.fvecs (" << ds.base.n << " x " << ds.base.d << ")\n";
        } else if (*gt) {
            auto base = vx::load_vectors(gt_base);
            auto q = vx::load_vectors(gt_queries);
            auto r = vx::compute_ground_truth(base, q, gt_k, parse_metric(gt_metric));
            vx::save_ivecs(gt_out, vx::ids_to_matrix(r));
            std::cout << "wrote " << gt_out << " (" << r.nq << " x " << r.k << ")\n";
        } else if (*eval) {
            auto ds = eval_data.load();
            auto idx = build_trained(eval_index, ds);
            std::map<std::string, std::vector<double>> grid;
            if (!eval_nprobe.empty()) grid["nprobe"] = parse_list(eval_nprobe);
            if (!eval_ef.empty()) grid["efSearch"] = parse_list(eval_ef);
            if (!eval_shortlist.empty()) grid["shortlist"] = parse_list(eval_shortlist);
            std::vector<vx::EvalSetting> settings(1);
            for (const auto& [name, vals] : grid) {
                std::vector<vx::EvalSetting> next;
                for (const auto& s : settings) {
                    for (double v : vals) {
                        auto t = s;
                        t.values[name] = v;
                        next.push_back(t);
                    }
                }
                settings = std::move(next);
            }
            for (auto& s : settings) s.params = vx::params_from_axes(s.values);
            vx::EvalOptions opt;
            opt.repeats = repeats;
            auto rows = vx::run_eval(*idx, ds, settings, opt);
            Table t(kEvalColumns);
            for (const auto& r : rows) t.add_row(eval_cells(r, label_of(r.setting)));
            eval_out.emit(t);
        } else if (*sw) {
            auto ds = sweep_data.load();
            auto idx = build_trained(sweep_index, ds);
            std::vector<vx::Axis> ax;
            for (const auto& a : axes) ax.push_back(parse_axis(a));
            vx::ParameterSpace space(ax);
            vx::EvalOptions opt;
            opt.repeats = repeats;
            auto res = vx::sweep(*idx, ds, space, measure, sweep_seed, opt);
            auto cols = kEvalColumns;
            cols.push_back("frontier");
            Table t(cols);
            for (size_t i = 0; i < res.rows.size(); ++i) {
                const auto& pt = res.explore.evaluated[i];
                bool on = std::find(res.explore.frontier.begin(), res.explore.frontier.end(), pt) !=
                          res.explore.frontier.end();
                auto cells = eval_cells(res.rows[i], label_of(res.rows[i].setting));
                cells.push_back(on ? 1.0 : 0.0);
                t.add_row(cells);
            }
            sweep_out.emit(t);
            std::cerr << "evaluated " << res.explore.evaluated.size() << " of " << space.size() << " settings, "
                      << res.explore.frontier.size() << " on the frontier\n";
            if (!sweep_json.empty()) {
                nlohmann::ordered_json j;
                auto point = [&](const vx::OperatingPoint& p) {
                    nlohmann::ordered_json o;
                    auto vals = space.values(p.setting);
                    for (size_t i = 0; i < vals.size(); ++i) o[space.axes()[i].name] = vals[i];
                    o["qps"] = p.speed;
                    o[measure] = p.accuracy;
                    return o;
                };
                j["space_size"] = space.size();
                j["evaluated"] = nlohmann::ordered_json::array();
                for (const auto& p : res.explore.evaluated) j["evaluated"].push_back(point(p));
                j["frontier"] = nlohmann::ordered_json::array();
                for (const auto& p : res.explore.frontier) j["frontier"].push_back(point(p));
                std::ofstream(sweep_json) << j.dump(2) << "\n";
            }
        } else if (*ce) {
            auto ds = codec_data.load(1);
            Table t({"codec", "code_size", "mse", "1-R@1", "1-R@10"});
            for (const auto& spec : codecs) {
                auto fs = vx::parse_factory_spec(spec);
                if (fs.main != vx::FactorySpec::Main::Codec || !fs.transforms.empty() || fs.refine) {
                    throw vx::Error(vx::ErrorKind::InvalidArgument, "codec-eval expects a bare codec string, got " + spec);
                }
                auto idx = vx::build_index(fs, ds.base.d, ds.metric);
                idx->train(ds.train);
                idx->add(ds.base);
                auto& cfi = static_cast<vx::CodecFlatIndex&>(*idx);
                double mse = vx::codec_mse(cfi.codec(), ds.base);
                size_t k = std::min<size_t>(10, ds.base.n);
                auto r = idx->search(ds.queries, k);
                t.add_row({spec, static_cast<double>(cfi.codec().code_size()), mse, vx::knn_recall(r, ds.ground_truth, 1, 1),
                           k >= 10 ? vx::knn_recall(r, ds.ground_truth, 1, 10) : std::nan("")});
            }
            codec_out.emit(t);
        } else if (*cm) {
            auto q_only = cm_data;
            vx::SynthParams p;
            p.nq = cm_data.nq;
            vx::Dataset ds = cm_data.base.empty()
                                 ? vx::synth_dataset(vx::parse_synth_kind(cm_data.kind), cm_data.n, cm_data.d, cm_data.seed, p)
                                 : q_only.load(1);
            auto kg = parse_size_list(kgrid);
            auto pg = parse_size_list(pgrid);
            auto rep = vx::validate_cost_model(ds.base, ds.queries, kg, pg, cm_data.seed + 1234);
            Table t({"K", "P", "measured_ndis", "model_ndis", "imbalance"});
            for (const auto& r : rep.rows) {
                t.add_row({static_cast<double>(r.k_ivf), static_cast<double>(r.p_ivf), r.measured_ndis, r.model_ndis,
                           r.imbalance});
            }
            cm_out.emit(t);
            bool ok = true;
            for (const auto& [pv, karg] : rep.measured_argmin) {
                size_t near = vx::grid_closest_log(kg, rep.optimum[pv]);
                long gap = std::labs(static_cast<long>(vx::grid_position(kg, karg)) -
                                     static_cast<long>(vx::grid_position(kg, near)));
                std::cerr << "P=" << pv << ": measured argmin K=" << karg << ", model argmin K=" << rep.model_argmin[pv]
                          << ", sqrt(P*N)=" << rep.optimum[pv] << " (grid step gap " << gap << ")\n";
                ok = ok && gap <= 1;
            }
            if (cm_check && !ok) return 2;
        } else if (*sc) {
            auto pts = vx::measure_ivf_scaling(vx::parse_synth_kind(sc_kind), parse_size_list(sizes), sc_d, sc_nq, target,
                                               sc_seed);
            Table t({"N", "nlist", "nprobe", "recall", "seconds"});
            std::vector<std::pair<double, double>> fit_in;
            for (const auto& p : pts) {
                t.add_row({static_cast<double>(p.n), static_cast<double>(p.nlist), static_cast<double>(p.nprobe), p.recall,
                           p.seconds});
                fit_in.push_back({static_cast<double>(p.n), p.seconds});
            }
            sc_out.emit(t);
            auto fit = vx::fit_scaling_law(fit_in);
            std::cerr << "t0=" << fit.t0 << " alpha=" << fit.alpha << "\n";
            if (sc_check && !(fit.alpha < 1.0)) return 2;
        } else if (*fl) {
            vx::Rng rng(f_seed);
            std::vector<vx::WordSet> items(f_n);
            // Zipf-like word popularity.
            std::vector<double> w(f_vocab);
            for (size_t i = 0; i < f_vocab; ++i) w[i] = 1.0 / static_cast<double>(i + 1);
            std::discrete_distribution<std::uint32_t> word(w.begin(), w.end());
            std::poisson_distribution<size_t> count(static_cast<double>(f_words));
            for (auto& it : items) {
                size_t c = std::max<size_t>(1, count(rng));
                for (size_t j = 0; j < c; ++j) it.push_back(word(rng));
            }
            vx::WordPostings postings(f_vocab, items);
            vx::WordSignatureTable table(f_vocab, f_n, f_p, f_seed + 1);
            vx::SynthParams sp;
            sp.nq = f_nq;
            auto ds = vx::synth_dataset(vx::SynthKind::Gaussian, f_n, f_d, f_seed, sp);
            std::vector<vx::idx_t> ids(f_n);
            for (size_t i = 0; i < f_n; ++i) ids[i] = vx::pack_id_signature(static_cast<vx::idx_t>(i), postings.words_of(i), table);
            vx::FlatIndex flat(f_d);
            flat.add_with_ids(ds.base, ids);
            std::vector<vx::WordSet> queries(f_nq);
            size_t vf = 0, mf = 0, empty = 0;
            for (size_t qi = 0; qi < f_nq; ++qi) {
                queries[qi] = {word(rng)};
                if (qi % 2) queries[qi].push_back(word(rng));
                vx::FilterPlan plan;
                vx::filtered_word_search(flat, ds.base, table, postings, ds.queries.slice(qi, qi + 1), 10, queries[qi], {},
                                         f_threshold, &plan);
                if (plan.kind == vx::FilterPlanKind::VectorFirst) ++vf;
                else if (plan.kind == vx::FilterPlanKind::MetadataFirst) ++mf;
                else ++empty;
            }
            auto st = vx::prefilter_stats(table, postings, queries);
            Table t({"p", "threshold", "vector_first", "metadata_first", "empty", "false_pass_rate", "rejection_rate"});
            t.add_row({f_p, f_threshold, static_cast<double>(vf), static_cast<double>(mf), static_cast<double>(empty),
                       st.false_pass_rate(), st.rejection_rate()});
            f_out.emit(t);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
