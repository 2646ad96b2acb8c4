#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "exprlab/gnn/gnn.hpp"
#include "exprlab/util/files.hpp"
#include "json.hpp"

using namespace exprlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "exprlab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("exprlab_cli_" + std::to_string(::getpid()) + "_" +
                                             std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::string mean_projection(const TempDir& dir) {
    std::vector<double> w{0.0, 1.0}, b{0.0};
    const std::string p = dir / "mean.json";
    write_gnn(p, Gnn({GnnLayer(Fnn::affine(2, 1, w, b), {Aggregation::mean()})}));
    return p;
}

}  // namespace

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"gen", "--family", "star_sv"}).code, 2);  // missing --k
    EXPECT_EQ(run({"gen", "--family", "star_sv", "--k", "2", "--bogus"}).code, 2);
    EXPECT_EQ(run({"gen", "--family", "star_uc", "--k", "2", "--c", "0"}).code, 2);
    EXPECT_EQ(run({"train", "--out", "x", "--train-k", "5..2"}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({"gen", "--help"}).code, 0);
    const auto r = run({"compile", "--model", "/nonexistent/model.json", "--eps", "0.25"});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, GenStar) {
    const auto r = run({"gen", "--family", "star_sv", "--k", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j.at("n").get<int>(), 6);
    EXPECT_EQ(j.at("edges").size(), 5u);
}

TEST(Cli, GenWritesOutFile) {
    TempDir dir;
    const auto r = run({"gen", "--family", "star_uc", "--k", "5", "--c", "3", "--out", dir / "g.json"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    const auto j = json::parse(read_file(dir / "g.json"));
    EXPECT_EQ(j.at("features")[1][0].get<double>(), 3.0);
}

TEST(Cli, MinimaxExample) {
    const auto r = run({"analyze", "--kind", "minimax", "--values", "1,2,4", "--degree", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(json::parse(r.out).at("gap").get<double>(), 0.25, 1e-9);
    EXPECT_EQ(run({"analyze", "--kind", "minimax", "--values", "1,2", "--degree", "1"}).code, 2);
    EXPECT_EQ(run({"analyze", "--kind", "minimax", "--values", "1,x,2"}).code, 2);
}

TEST(Cli, VerifyEmulation) {
    TempDir dir;
    const auto r = run({"--seed", "4", "verify", "--kind", "emulation", "--model", mean_projection(dir), "--eps",
                        "0.25", "--graphs", "20"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_LE(j.at("max_gap").get<double>(), 0.25);
    EXPECT_TRUE(j.at("within").get<bool>());
    EXPECT_EQ(run({"verify", "--kind", "growth"}).code, 2);
}

TEST(Cli, VerifySandwichSeeded) {
    const std::vector<std::string> args{"--seed", "9", "verify", "--kind", "sandwich", "--agg", "max", "--graphs", "10"};
    const auto a = run(args), b = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(json::parse(a.out).at("violations").get<int>(), 0);
}

TEST(Cli, CompileAndAnalyze) {
    TempDir dir;
    const std::string model = mean_projection(dir);
    auto r = run({"compile", "--model", model, "--eps", "0.25", "--out", dir / "sum.json", "--report",
                  dir / "report.json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Gnn sum = read_gnn(dir / "sum.json");
    EXPECT_TRUE(sum.uses_only(AggKind::sum));
    EXPECT_EQ(json::parse(read_file(dir / "report.json")).at("m").get<int>(), 1);

    r = run({"analyze", "--kind", "describe", "--model", model, "--family", "star_uc"});
    EXPECT_EQ(r.code, 1);  // mean is outside the symbolic fragment
    r = run({"analyze", "--kind", "pieces", "--model", dir / "sum.json", "--k-range", "1..40"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto p = json::parse(r.out);
    EXPECT_LE(p.at("detected_pieces").get<std::uint64_t>(), p.at("bound").get<std::uint64_t>());

    r = run({"analyze", "--kind", "counterexample", "--model", model, "--eps", "0.5", "--k-max", "64", "--c-max",
             "64"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_FALSE(json::parse(r.out).at("found").get<bool>());
}

TEST(Cli, TrainEvalReport) {
    TempDir dir;
    const std::string runs = dir / "runs";
    auto r = run({"--seed", "5", "train", "--task", "uc", "--model", "mean", "--hidden", "4", "--epochs", "2",
                  "--lrs", "1e-3", "--runs", "2", "--train-k", "1..4", "--train-c", "1..5", "--test-k", "6..7",
                  "--test-c", "6..8", "--out", runs});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"config_uc_mean.txt", "model_uc_mean_s5.json", "model_uc_mean_s6.json",
                          "history_uc_mean_s5.csv", "metrics_uc_mean_s6.csv"})
        EXPECT_TRUE(fs::exists(fs::path(runs) / f)) << f;
    EXPECT_EQ(first_line(read_file(fs::path(runs) / "metrics_uc_mean_s5.csv")), "task,model,seed,k,c,re");
    EXPECT_EQ(first_line(read_file(fs::path(runs) / "history_uc_mean_s5.csv")), "lr0,epoch,lr,train_loss,val_loss");

    r = run({"--seed", "5", "eval", "--model", (fs::path(runs) / "model_uc_mean_s5.json").string(), "--grid",
             "k=2..3,c=4..4", "--name", "mean"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(first_line(r.out), "task,model,seed,k,c,re");
    EXPECT_NE(r.out.find("\nuc,mean,5,3,4,"), std::string::npos);

    r = run({"report", "--runs", runs, "--svg", "--out", dir / "rep1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(first_line(read_file(dir / "rep1/summary.csv")), "task,model,k,c,median_re,mean_re,runs");
    ASSERT_TRUE(fs::exists(dir / "rep1/re_uc_k6.svg"));
    ASSERT_TRUE(fs::exists(dir / "rep1/re_uc_k7.svg"));
    r = run({"report", "--runs", runs, "--svg", "--out", dir / "rep2"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_file(dir / "rep1/re_uc_k6.svg"), read_file(dir / "rep2/re_uc_k6.svg"));

    // Same config, same seeds: identical models.
    r = run({"train", "--config", (fs::path(runs) / "config_uc_mean.txt").string(), "--out", dir / "again"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_file(fs::path(runs) / "model_uc_mean_s6.json"), read_file(dir / "again/model_uc_mean_s6.json"));
}

TEST(Cli, ReportErrors) {
    TempDir dir;
    EXPECT_EQ(run({"report", "--runs", dir / "missing"}).code, 1);
    EXPECT_EQ(run({"report", "--runs", dir.path().string()}).code, 1);  // empty
    write_file_atomic(dir / "metrics_bad.csv", "task,model\nuc\n");
    EXPECT_EQ(run({"report", "--runs", dir.path().string()}).code, 1);
}
