#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "exprlab/analysis/counterexample.hpp"
#include "exprlab/analysis/describe.hpp"
#include "exprlab/analysis/minimax.hpp"
#include "exprlab/analysis/pieces.hpp"
#include "exprlab/constructions/emulation.hpp"
#include "exprlab/constructions/verify.hpp"
#include "exprlab/experiments/metrics.hpp"
#include "exprlab/experiments/report.hpp"
#include "exprlab/experiments/train.hpp"
#include "exprlab/graph/families.hpp"
#include "exprlab/util/error.hpp"
#include "exprlab/util/files.hpp"

namespace exprlab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad flag values found after parsing; exit code 2 like parse errors.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

IntRange parse_range_flag(const std::string& s, const char* flag) {
    const auto dots = s.find("..");
    try {
        std::size_t used = 0;
        if (dots == std::string::npos) {
            const auto v = std::stoull(s, &used);
            if (used == s.size() && v >= 1) return {v, v};
        } else {
            const auto lo = std::stoull(s.substr(0, dots), &used);
            if (used == dots) {
                const std::string rest = s.substr(dots + 2);
                const auto hi = std::stoull(rest, &used);
                if (used == rest.size() && lo >= 1 && hi >= lo) return {lo, hi};
            }
        }
    } catch (const std::logic_error&) {
    }
    throw UsageError(std::string(flag) + ": expected N or lo..hi with 1 <= lo <= hi, got '" + s + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& s, const char* flag) {
    std::vector<T> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        std::istringstream is(item);
        T v;
        if (!(is >> v) || !is.eof()) throw UsageError(std::string(flag) + ": bad list item '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
    return out;
}

void emit(std::ostream& out, const std::string& path, const std::string& text) {
    if (path.empty())
        out << text;
    else
        write_file_atomic(path, text);
}

void emit_json(std::ostream& out, const std::string& path, const json& j) { emit(out, path, j.dump(2) + "\n"); }

const std::vector<std::string> kFamilies{"star_sv", "star_uc", "star_flag", "bipartite_uc", "tripartite_sv",
                                         "tripartite_embed"};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Aggregation expressivity laboratory"};
    app.name("exprlab");
    app.require_subcommand(1);
    app.fallthrough();
    std::uint64_t seed = 0;
    auto* o_seed = app.add_option("--seed", seed, "Seed for every random choice")->capture_default_str();

    std::string out_path;
    std::function<void()> action;

    // gen
    auto* gen = app.add_subcommand("gen", "Write a family graph as JSON");
    std::string family;
    std::uint64_t k = 1, c = 1;
    gen->add_option("--family", family)->required()->check(CLI::IsMember(kFamilies));
    gen->add_option("--k", k)->required()->check(CLI::PositiveNumber);
    gen->add_option("--c", c, "c, or b in {0,1} for star_flag")->capture_default_str();
    gen->add_option("--out", out_path, "Output file (stdout if omitted)");
    gen->callback([&] {
        action = [&] {
            const FamilySpec spec{family_from_string(family), k, c};
            try {
                validate(spec);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            emit_json(out, out_path, to_json(make_family(spec)));
        };
    });

    // compile
    auto* compile = app.add_subcommand("compile", "Compile a Mean- or Max-GNN into a Sum-GNN");
    std::string model_path, report_path;
    double eps = 0.25;
    std::size_t max_units = CompileOptions{}.max_gadget_units;
    compile->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    compile->add_option("--eps", eps)->required()->check(CLI::PositiveNumber);
    compile->add_option("--max-units", max_units)->capture_default_str();
    compile->add_option("--out", out_path, "Compiled model file (stdout if omitted)");
    compile->add_option("--report", report_path, "Also write the emulation report here");
    compile->callback([&] {
        action = [&] {
            const auto [sum, report] = compile_to_sum(read_gnn(model_path), eps, {max_units});
            emit_json(out, out_path, to_json(sum));
            if (!report_path.empty()) write_file_atomic(report_path, to_json(report).dump(2) + "\n");
            if (!out_path.empty()) out << to_json(report).dump(2) << "\n";
        };
    });

    // verify
    auto* verify = app.add_subcommand("verify", "Check a construction on random graphs");
    std::string kind, agg = "mean", ks_text = "1,10,1000,1000000";
    std::size_t d = 1, graphs = 100, max_vertices = 20;
    verify->add_option("--kind", kind)->required()->check(CLI::IsMember({"sandwich", "growth", "emulation"}));
    verify->add_option("--agg", agg, "sandwich: mean or max")->check(CLI::IsMember({"mean", "max"}))->capture_default_str();
    verify->add_option("--eps", eps)->check(CLI::PositiveNumber)->capture_default_str();
    verify->add_option("--d", d)->check(CLI::PositiveNumber)->capture_default_str();
    verify->add_option("--graphs", graphs)->capture_default_str();
    verify->add_option("--max-vertices", max_vertices)->check(CLI::PositiveNumber)->capture_default_str();
    verify->add_option("--model", model_path, "growth, emulation: source model")->check(CLI::ExistingFile);
    verify->add_option("--ks", ks_text, "growth: star sizes")->capture_default_str();
    verify->add_option("--max-units", max_units)->capture_default_str();
    verify->add_option("--out", out_path);
    verify->callback([&] {
        action = [&] {
            std::mt19937_64 rng(seed);
            if (kind != "sandwich" && model_path.empty()) throw UsageError("--model is required for --kind " + kind);
            json result;
            bool ok = true;
            if (kind == "sandwich") {
                const auto chk = verify_sandwich(agg == "mean" ? AggKind::mean : AggKind::max, eps, d, graphs,
                                                 max_vertices, rng);
                result = to_json(chk);
                ok = chk.violations == 0;
            } else if (kind == "growth") {
                const auto chk = verify_growth(read_gnn(model_path), parse_list<std::uint64_t>(ks_text, "--ks"));
                result = to_json(chk);
                ok = chk.holds;
            } else {
                const Gnn src = read_gnn(model_path);
                const auto [sum, report] = compile_to_sum(src, eps, {max_units});
                const auto chk = verify_emulation(src, sum, eps, graphs, max_vertices, rng);
                result = to_json(chk);
                result["compile"] = to_json(report);
                ok = chk.within;
            }
            emit_json(out, out_path, result);
            if (!ok) throw Error("verification failed");
        };
    });

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Symbolic and numeric analysis tools");
    std::string target = "center", values_text, grid_k = "1..20", grid_c = "1..20", k_range = "1..200",
                target_fn = "c";
    std::size_t cap = DescribeOptions{}.cap, degree = 1;
    bool prune = false;
    std::int64_t x0 = 0;
    std::uint64_t k_max = 10000, c_max = 10000;
    double ratio = 2.0;
    analyze->add_option("--kind", kind)->required()->check(CLI::IsMember({"describe", "pieces", "minimax", "counterexample"}));
    analyze->add_option("--model", model_path)->check(CLI::ExistingFile);
    analyze->add_option("--family", family)->check(CLI::IsMember(kFamilies));
    analyze->add_option("--target", target, "describe: center or readout")->check(CLI::IsMember({"center", "readout"}))->capture_default_str();
    analyze->add_option("--cap", cap)->capture_default_str();
    analyze->add_flag("--prune", prune, "describe: skip ReLU splits of sign-definite polynomials");
    analyze->add_option("--grid-k", grid_k, "describe: k range of the numeric check")->capture_default_str();
    analyze->add_option("--grid-c", grid_c, "describe: c range of the numeric check")->capture_default_str();
    analyze->add_option("--k-range", k_range, "pieces: sampled k")->capture_default_str();
    analyze->add_option("--c", c, "pieces: fixed c")->capture_default_str();
    analyze->add_option("--values", values_text, "minimax: comma separated samples");
    analyze->add_option("--x", x0, "minimax: first sample point")->capture_default_str();
    analyze->add_option("--degree", degree)->capture_default_str();
    analyze->add_option("--fn", target_fn, "counterexample: target c, k or kc")->check(CLI::IsMember({"c", "k", "kc"}))->capture_default_str();
    analyze->add_option("--eps", eps)->check(CLI::PositiveNumber)->capture_default_str();
    analyze->add_option("--k-max", k_max)->capture_default_str();
    analyze->add_option("--c-max", c_max)->capture_default_str();
    analyze->add_option("--ratio", ratio)->capture_default_str();
    analyze->add_option("--out", out_path);
    analyze->callback([&] {
        action = [&] {
            auto need_model = [&] {
                if (model_path.empty()) throw UsageError("--model is required for --kind " + kind);
                return read_gnn(model_path);
            };
            auto fam = [&](const char* fallback) { return family_from_string(family.empty() ? fallback : family); };
            if (kind == "minimax") {
                if (values_text.empty()) throw UsageError("--values is required for --kind minimax");
                const auto v = parse_list<double>(values_text, "--values");
                if (v.size() < degree + 2) throw UsageError("--values needs at least degree+2 samples");
                emit_json(out, out_path, to_json(minimax_gap(v, x0, degree)));
            } else if (kind == "describe") {
                const Gnn g = need_model();
                const Family f = fam("star_uc");
                DescribeOptions opts;
                opts.cap = cap;
                opts.prune_signs = prune;
                const DescribeTarget t = target == "center" ? DescribeTarget::center : DescribeTarget::sum_readout;
                const PolySet ps = describe(g, f, t, opts);
                const IntRange gk = parse_range_flag(grid_k, "--grid-k"), gc = parse_range_flag(grid_c, "--grid-c");
                const auto chk = check_description(ps, g, f, t, gk.lo, gk.hi, gc.lo, gc.hi);
                json j = to_json(ps);
                j["check"] = {{"points", chk.points}, {"violations", chk.violations.size()}, {"ambiguous", chk.ambiguous}};
                emit_json(out, out_path, j);
            } else if (kind == "pieces") {
                const IntRange kr = parse_range_flag(k_range, "--k-range");
                emit_json(out, out_path,
                          to_json(analyze_pieces(need_model(), fam("star_sv"), std::int64_t(kr.lo), std::int64_t(kr.hi), c)));
            } else {
                const Gnn g = need_model();
                std::function<double(std::uint64_t, std::uint64_t)> fn;
                if (target_fn == "c") fn = [](std::uint64_t, std::uint64_t cc) { return double(cc); };
                if (target_fn == "k") fn = [](std::uint64_t kk, std::uint64_t) { return double(kk); };
                if (target_fn == "kc") fn = [](std::uint64_t kk, std::uint64_t cc) { return double(kk) * double(cc); };
                if (!(ratio > 1.0) || k_max < 1 || c_max < 1) throw UsageError("need --ratio > 1 and positive --k-max, --c-max");
                const auto w = counterexample_search(g, fam("star_uc"), fn, eps, {k_max, c_max, ratio});
                json j = {{"found", w.has_value()}};
                if (w) j.update({{"k", w->k}, {"c", w->c}, {"output", w->output}, {"gap", w->gap}});
                emit_json(out, out_path, j);
            }
        };
    });

    // train
    auto* trn = app.add_subcommand("train", "Train GNNs on the UC or SV task");
    TaskSpec spec;
    TrainConfig cfg;
    std::string task_name = "uc", model_name = "mean", config_path, lrs_text, train_k, train_c, test_k, test_c;
    std::size_t runs = 3;
    bool no_eval = false;
    trn->add_option("--config", config_path, "key=value file as written by a previous run")->check(CLI::ExistingFile);
    auto* o_task = trn->add_option("--task", task_name)->check(CLI::IsMember({"uc", "sv"}));
    auto* o_model = trn->add_option("--model", model_name)->check(CLI::IsMember({"sum", "mean", "sum_mean"}));
    auto* o_hidden = trn->add_option("--hidden", spec.hidden_dim)->check(CLI::PositiveNumber);
    auto* o_layers = trn->add_option("--layers", spec.layers)->check(CLI::PositiveNumber);
    auto* o_both = trn->add_flag("--both-slots", spec.both_slots, "sum_mean: give each layer both aggregations");
    auto* o_epochs = trn->add_option("--epochs", cfg.epochs);
    auto* o_batch = trn->add_option("--batch", cfg.batch_size)->check(CLI::PositiveNumber);
    auto* o_lrs = trn->add_option("--lrs", lrs_text, "comma separated learning rates");
    auto* o_val = trn->add_option("--val-fraction", cfg.val_fraction);
    auto* o_trk = trn->add_option("--train-k", train_k);
    auto* o_trc = trn->add_option("--train-c", train_c);
    auto* o_tek = trn->add_option("--test-k", test_k);
    auto* o_tec = trn->add_option("--test-c", test_c);
    auto* o_runs = trn->add_option("--runs", runs, "seeds seed, seed+1, ...")->check(CLI::PositiveNumber)->capture_default_str();
    trn->add_flag("--no-eval", no_eval, "skip the test-grid evaluation");
    trn->add_option("--out", out_path, "run directory")->required();
    trn->callback([&] {
        action = [&] {
            TaskSpec s;
            TrainConfig tc;
            if (!config_path.empty()) {
                const auto kv = parse_config(read_file(config_path));
                s = task_spec_from_config(kv);
                tc = train_config_from_config(kv);
            }
            if (o_task->count() || config_path.empty()) s.task = task_from_string(task_name);
            if (o_model->count() || config_path.empty()) s.model = model_from_string(model_name);
            if (o_hidden->count()) s.hidden_dim = spec.hidden_dim;
            if (o_layers->count()) s.layers = spec.layers;
            if (o_both->count()) s.both_slots = spec.both_slots;
            if (o_epochs->count()) tc.epochs = cfg.epochs;
            if (o_batch->count()) tc.batch_size = cfg.batch_size;
            if (o_lrs->count()) tc.lr_candidates = parse_list<double>(lrs_text, "--lrs");
            if (o_val->count()) tc.val_fraction = cfg.val_fraction;
            if (o_trk->count()) s.train_k = parse_range_flag(train_k, "--train-k");
            if (o_trc->count()) s.train_c = parse_range_flag(train_c, "--train-c");
            if (o_tek->count()) s.test_k = parse_range_flag(test_k, "--test-k");
            if (o_tec->count()) s.test_c = parse_range_flag(test_c, "--test-c");
            // A config file keeps its own seeds unless --seed or --runs is given.
            if (config_path.empty() || o_seed->count() || o_runs->count()) {
                s.seeds.clear();
                for (std::size_t i = 0; i < runs; ++i) s.seeds.push_back(seed + i);
            }
            try {
                validate(s);
                validate(tc);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }

            fs::create_directories(out_path);
            const std::string tag = std::string(to_string(s.task)) + "_" + to_string(s.model);
            auto kv = to_config(s);
            kv.merge(to_config(tc));
            write_file_atomic(fs::path(out_path) / ("config_" + tag + ".txt"), config_text(kv));
            json summary = json::array();
            for (std::uint64_t sd : s.seeds) {
                const TrainResult r = train(s, tc, sd);
                const std::string stem = tag + "_s" + std::to_string(sd);
                write_gnn(fs::path(out_path) / ("model_" + stem + ".json"), r.gnn);
                write_file_atomic(fs::path(out_path) / ("history_" + stem + ".csv"), history_csv(r.history));
                json row = {{"seed", sd}, {"chosen_lr", r.chosen_lr}, {"best_val_loss", r.best_val_loss},
                            {"diverged_lrs", r.diverged_lrs}};
                if (!no_eval) {
                    const ReTable t = evaluate_re(r.gnn, s.task, s.test_k, s.test_c, to_string(s.model), sd);
                    write_file_atomic(fs::path(out_path) / ("metrics_" + stem + ".csv"), metrics_csv(t.entries));
                    row["median_test_re"] = t.median();
                }
                summary.push_back(row);
            }
            out << summary.dump(2) << "\n";
        };
    });

    // eval
    auto* ev = app.add_subcommand("eval", "Relative error of a model over a (k, c) grid");
    std::string eval_k = "31..100", eval_c = "31..100", grid, label;
    ev->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    ev->add_option("--task", task_name)->check(CLI::IsMember({"uc", "sv"}))->capture_default_str();
    ev->add_option("--k", eval_k, "k range")->capture_default_str();
    ev->add_option("--c", eval_c, "c range")->capture_default_str();
    ev->add_option("--grid", grid, "k=lo..hi,c=lo..hi; overrides --k and --c");
    ev->add_option("--name", label, "model column (default: model file stem)");
    ev->add_option("--out", out_path, "metrics CSV (stdout if omitted)");
    ev->callback([&] {
        action = [&] {
            if (!grid.empty()) {
                std::stringstream ss(grid);
                for (std::string part; std::getline(ss, part, ',');) {
                    if (part.rfind("k=", 0) == 0)
                        eval_k = part.substr(2);
                    else if (part.rfind("c=", 0) == 0)
                        eval_c = part.substr(2);
                    else
                        throw UsageError("--grid: expected k=lo..hi,c=lo..hi, got '" + grid + "'");
                }
            }
            const IntRange kr = parse_range_flag(eval_k, "--k"), cr = parse_range_flag(eval_c, "--c");
            const std::string name = label.empty() ? fs::path(model_path).stem().string() : label;
            const ReTable t = evaluate_re(read_gnn(model_path), task_from_string(task_name), kr, cr, name, seed);
            emit(out, out_path, metrics_csv(t.entries));
        };
    });

    // report
    auto* rep = app.add_subcommand("report", "Summarize metrics CSVs and plot RE against c");
    std::string runs_dir, ks_plot;
    bool svg = false;
    rep->add_option("--runs", runs_dir)->required();
    rep->add_option("--out", out_path, "output directory (default: the run directory)");
    rep->add_flag("--svg", svg, "write one plot per (task, k)");
    rep->add_option("--k", ks_plot, "comma separated k values to plot (default: all)");
    rep->callback([&] {
        action = [&] {
            std::vector<std::uint64_t> ks;
            if (!ks_plot.empty()) ks = parse_list<std::uint64_t>(ks_plot, "--k");
            const ReportFiles f = write_report(runs_dir, out_path.empty() ? runs_dir : out_path, svg, ks);
            json j = {{"summary", f.summary.string()}, {"plots", json::array()}};
            for (const auto& p : f.plots) j["plots"].push_back(p.string());
            out << j.dump(2) << "\n";
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        err << "exprlab: " << e.what() << "\n";
        return 2;
    }
    try {
        action();
        return 0;
    } catch (const UsageError& e) {
        err << "exprlab: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "exprlab: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace exprlab
