#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rapd/app/commands.hpp"
#include "rapd/errors.hpp"
#include "test_support.hpp"

namespace rapd {
namespace {

using namespace app;
namespace fs = std::filesystem;

synth::SimParams quick_params() {
    synth::SimParams p;
    p.fps = 4;
    p.swings = 1;
    return p;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(RAPD_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// One small generated corpus shared by the tests in this file.
class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new testing::TempDir("cli");
        GenerateOptions g;
        g.out_dir = dir_->path() / "corpus";
        g.count_per_class = 2;
        g.seed = 5;
        g.params = quick_params();
        std::ostringstream sink;
        summary_ = cmd_generate(g, sink);
        std::ofstream(dir_->path() / "params.json") << R"({"fps": 4, "swings": 1})";
    }
    static void TearDownTestSuite() {
        delete dir_;
        dir_ = nullptr;
    }
    static fs::path root() { return dir_->path(); }
    static fs::path corpus() { return dir_->path() / "corpus"; }

    static testing::TempDir* dir_;
    static CorpusSummary summary_;
};

testing::TempDir* Cli::dir_ = nullptr;
CorpusSummary Cli::summary_;

TEST_F(Cli, GenerateWritesBalancedCorpus) {
    EXPECT_EQ(summary_.cases, 4);
    EXPECT_EQ(summary_.positives, 2);
    EXPECT_EQ(summary_.negatives, 2);
    EXPECT_EQ(case_io::list_cases(corpus()).size(), 4u);
    EXPECT_TRUE(fs::exists(corpus() / "corpus.json"));
    EXPECT_EQ(summarize_corpus(corpus()).hash, summary_.hash);
    for (const auto& c : case_io::list_cases(corpus())) {
        const auto m = case_io::read_manifest(c);
        if (m.rapd_positive) {
            ASSERT_TRUE(m.alpha.has_value());
            EXPECT_GE(*m.alpha, 0.2);
            EXPECT_LE(*m.alpha, 0.6);
        }
    }
}

TEST_F(Cli, GenerateIsReproducible) {
    GenerateOptions g;
    g.out_dir = root() / "again";
    g.count_per_class = 2;
    g.seed = 5;
    g.params = quick_params();
    std::ostringstream sink;
    EXPECT_EQ(cmd_generate(g, sink).hash, summary_.hash);
    g.out_dir = root() / "other";
    g.seed = 6;
    EXPECT_NE(cmd_generate(g, sink).hash, summary_.hash);
    g.count_per_class = 0;
    EXPECT_THROW(cmd_generate(g, sink), ParameterError);
    g.count_per_class = 1;
    g.alpha_min = 0.7;
    g.alpha_max = 0.5;
    EXPECT_THROW(cmd_generate(g, sink), ParameterError);
}

TEST_F(Cli, AssessSeparatesHealthyAndAffectedCases) {
    RunConfig cfg;
    cfg.output_dir = root() / "assess";
    std::ostringstream sink;
    for (const auto& c : case_io::list_cases(corpus())) {
        const auto m = case_io::read_manifest(c);
        const auto r = cmd_assess(c, cfg, sink);
        EXPECT_EQ(r.decision, m.rapd_positive) << m.case_id << " score " << r.score.value;
        EXPECT_TRUE(fs::exists(cfg.output_dir / (m.case_id + "_traces.csv")));
        const auto j = nlohmann::json::parse(slurp(cfg.output_dir / (m.case_id + "_assessment.json")));
        EXPECT_EQ(j["decision"], case_io::label_name(m.rapd_positive));
        EXPECT_DOUBLE_EQ(j["score"].get<double>(), r.score.value);
        EXPECT_DOUBLE_EQ(j["threshold"].get<double>(), kDefaultThreshold);
    }
    EXPECT_THROW(cmd_assess(root() / "missing_case", cfg, sink), IngestionError);
    cfg.localizer = LocalizerKind::Patch;
    EXPECT_THROW(cmd_assess(case_io::list_cases(corpus())[0], cfg, sink), ParameterError);
}

TEST_F(Cli, MeasureWritesPerEyeCsv) {
    RunConfig cfg;
    cfg.output_dir = root() / "measure";
    std::ostringstream sink;
    const auto c = case_io::list_cases(corpus())[0];
    cmd_measure(c, cfg, sink);
    const auto id = c.filename().string();
    for (const char* eye : {"right", "left"}) {
        const auto csv = slurp(cfg.output_dir / (id + "_" + eye + "_measurements.csv"));
        EXPECT_EQ(csv.rfind("frame_index,x,y,radius,votes,status\n", 0), 0u);
        EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), quick_params().frame_count() + 1);
    }
}

TEST_F(Cli, EvaluateGridIsConsistent) {
    RunConfig cfg;
    cfg.output_dir = root() / "eval";
    cfg.workers = 2;
    GridConfig grid;
    grid.localizers = {LocalizerKind::Starburst, LocalizerKind::ElSe};
    grid.smoothings = {reflex::Smoothing::None, reflex::Smoothing::MovAvg};
    grid.methods = {reflex::ScoreMethod::RapdIndex, reflex::ScoreMethod::Kendall};
    std::ostringstream sink;
    const auto rows = cmd_evaluate(corpus(), grid, cfg, sink);
    ASSERT_EQ(rows.size(), 8u);
    for (const auto& row : rows) {
        std::vector<double> scores;
        std::vector<bool> labels;
        for (const auto& p : row.scatter) {
            scores.push_back(p.score);
            labels.push_back(p.rapd_positive);
        }
        ASSERT_EQ(scores.size(), 4u);
        EXPECT_EQ(row.threshold, metrics::select_threshold(scores, labels));
        EXPECT_EQ(row.counts, metrics::confusion(labels, metrics::decide(scores, row.threshold)));
        EXPECT_NEAR(row.roc.auc_roc, metrics::roc_sweep(scores, labels).auc_roc, 1e-15);
        EXPECT_TRUE(fs::exists(cfg.output_dir / ("roc_" + row.slug() + ".csv")));
        EXPECT_TRUE(fs::exists(cfg.output_dir / ("scatter_" + row.slug() + ".csv")));
    }
    const auto csv = slurp(cfg.output_dir / "benchmark.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "localizer,crop,smoothing,method,threshold,tp,tn,fp,fn,precision,sensitivity,fpr,specificity,fnr,"
              "accuracy,balanced_accuracy,f1,auc_roc,auc_pr,failed_cases");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);

    cfg.workers = 1;
    cfg.output_dir = root() / "eval_serial";
    const auto serial = cmd_evaluate(corpus(), grid, cfg, sink);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < rows[i].scatter.size(); ++k)
            EXPECT_EQ(rows[i].scatter[k].score, serial[i].scatter[k].score);
    }
}

TEST_F(Cli, TrainBaselineIsDeterministic) {
    TrainBaselineOptions t;
    t.corpus = corpus();
    t.train.epochs = 3;
    t.data.frame_stride = 4;
    std::ostringstream sink;
    t.out_path = root() / "w1.json";
    const auto a = cmd_train_baseline(t, sink);
    t.out_path = root() / "w2.json";
    cmd_train_baseline(t, sink);
    EXPECT_EQ(slurp(root() / "w1.json"), slurp(root() / "w2.json"));
    EXPECT_GT(a.train_size, 0u);
    EXPECT_GT(a.val_size, 0u);
    EXPECT_GT(a.test_size, 0u);
    EXPECT_NO_THROW(patch::load_classifier((root() / "w1.json").string()));
    t.train.epochs = 0;
    EXPECT_THROW(cmd_train_baseline(t, sink), ParameterError);
}

TEST_F(Cli, PatchLocalizerRunsWithTrainedWeights) {
    TrainBaselineOptions t;
    t.corpus = corpus();
    t.train.epochs = 5;
    t.out_path = root() / "patch_weights.json";
    std::ostringstream sink;
    cmd_train_baseline(t, sink);
    RunConfig cfg;
    cfg.localizer = LocalizerKind::Patch;
    cfg.classifier_path = t.out_path.string();
    cfg.output_dir = root() / "assess_patch";
    const auto r = cmd_assess(case_io::list_cases(corpus())[0], cfg, sink);
    EXPECT_GE(r.score.value, 0.0);
    EXPECT_LE(r.score.value, 1.0);
}

TEST_F(Cli, ParamsJsonOverridesDefaults) {
    const auto p = sim_params_from_json(
        R"({"fps": 12, "baseline_radius": 22, "constriction_amplitude": 8, "frame_size": [128, 96]})");
    EXPECT_EQ(p.fps, 12.0);
    EXPECT_EQ(p.r0, 22.0);
    EXPECT_EQ(p.amplitude, 8.0);
    EXPECT_EQ(p.width, 128);
    EXPECT_EQ(p.height, 96);
    EXPECT_EQ(p.swings, synth::SimParams{}.swings);
    EXPECT_THROW(sim_params_from_json("{"), ParameterError);
    EXPECT_THROW(sim_params_from_json(R"({"fps": "fast"})"), ParameterError);
    EXPECT_THROW(sim_params_from_json(R"({"frame_size": 5})"), ParameterError);
}

TEST_F(Cli, OutputDirFromEnvironment) {
    ::setenv("RAPD_OUTPUT_DIR", "/tmp/rapd_env_out", 1);
    EXPECT_EQ(default_output_dir(), fs::path("/tmp/rapd_env_out"));
    ::unsetenv("RAPD_OUTPUT_DIR");
    EXPECT_EQ(default_output_dir(), fs::path("rapd_out"));
}

TEST_F(Cli, BinaryExitCodes) {
    const auto log = root() / "log.txt";
    const auto out = root() / "bin_out";
    const auto first = case_io::list_cases(corpus())[0].string();
    EXPECT_EQ(run_cli("generate --count 0 --out " + (root() / "g0").string(), log), 2);
    EXPECT_EQ(run_cli("assess " + (root() / "no_such_case").string() + " --output-dir " + out.string(), log), 4);
    EXPECT_NE(slurp(log).find("manifest.json"), std::string::npos);
    EXPECT_EQ(run_cli("assess " + first + " --localizer hough --output-dir " + out.string(), log), 2);
    EXPECT_EQ(run_cli("assess " + first + " --localizer patch --output-dir " + out.string(), log), 2);
    EXPECT_EQ(run_cli("frobnicate", log), 2);
    EXPECT_EQ(run_cli("", log), 2);
    EXPECT_EQ(run_cli("assess " + first + " --output-dir " + out.string(), log), 0);
    EXPECT_NE(slurp(log).find("\"decision\""), std::string::npos);
    EXPECT_EQ(run_cli("--help", log), 0);
}

TEST_F(Cli, BinaryGenerateHashIsReproducible) {
    const auto log1 = root() / "g1.txt";
    const auto log2 = root() / "g2.txt";
    const std::string common = " --count 1 --params " + (root() / "params.json").string() + " --seed 11";
    ASSERT_EQ(run_cli("generate --out " + (root() / "b1").string() + common, log1), 0);
    ASSERT_EQ(run_cli("generate --out " + (root() / "b2").string() + common, log2), 0);
    EXPECT_EQ(summarize_corpus(root() / "b1").hash, summarize_corpus(root() / "b2").hash);
    EXPECT_EQ(summarize_corpus(root() / "b1").cases, 2);
    EXPECT_NE(slurp(log1).find("2 cases"), std::string::npos);
}

TEST_F(Cli, ConfigFileSuppliesDefaultsAndFlagsWin) {
    const auto log = root() / "cfg.txt";
    const auto first = case_io::list_cases(corpus())[0].string();
    const auto cfg_path = root() / "config.json";
    std::ofstream(cfg_path) << R"({"localizer": "bogus", "output_dir": ")" + (root() / "cfg_out").string() + R"("})";
    EXPECT_EQ(run_cli("--config " + cfg_path.string() + " assess " + first, log), 2);
    EXPECT_EQ(run_cli("--config " + cfg_path.string() + " assess " + first + " --localizer else", log), 0);
    EXPECT_TRUE(fs::exists(root() / "cfg_out"));
    EXPECT_EQ(run_cli("--config " + (root() / "absent.json").string() + " assess " + first, log), 4);
    std::ofstream(root() / "bad.json") << "{";
    EXPECT_EQ(run_cli("--config " + (root() / "bad.json").string() + " assess " + first, log), 2);
}

}  // namespace
}  // namespace rapd
