#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rapd/app/commands.hpp"
#include "rapd/errors.hpp"

namespace {

using namespace rapd;

// Values from --config apply to every option not given on the command line.
class ConfigFile {
public:
    void load(const std::string& path) {
        if (path.empty()) return;
        std::ifstream in(path);
        if (!in) throw IngestionError("cannot read config file " + path);
        try {
            json_ = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw ParameterError("config file " + path + " is not valid JSON: " + e.what());
        }
        if (!json_.is_object()) throw ParameterError("config file must hold a JSON object");
    }

    template <typename T>
    void apply(const CLI::Option* opt, const std::string& key, T& value) const {
        if (opt->count() > 0 || !json_.contains(key)) return;
        try {
            json_.at(key).get_to(value);
        } catch (const nlohmann::json::exception&) {
            throw ParameterError("config key '" + key + "' has the wrong type");
        }
    }

private:
    nlohmann::json json_ = nlohmann::json::object();
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) out.push_back(item);
    }
    if (out.empty()) throw ParameterError("empty list '" + s + "'");
    return out;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& s, Parse parse) {
    std::vector<T> out;
    for (const auto& item : split_list(s)) out.push_back(parse(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Automated RAPD screening from swinging-flashlight pupil recordings"};
    cli.require_subcommand(1);
    cli.fallthrough();

    std::string config_path;
    std::string output_dir = app::default_output_dir().string();
    int workers = 1;
    std::uint64_t seed = 0;
    cli.add_option("--config", config_path, "JSON file with option defaults (flags override it)");
    auto* o_out = cli.add_option("--output-dir", output_dir, "Output directory (env RAPD_OUTPUT_DIR)");
    auto* o_workers = cli.add_option("--workers", workers, "Case-level worker threads")->check(CLI::PositiveNumber);
    auto* o_seed = cli.add_option("--seed", seed, "Random seed");

    std::string localizer = "starburst", crop = "half_image", smoothing = "mov_avg", method = "rapd_index";
    std::string classifier;
    double threshold = app::kDefaultThreshold;
    auto add_run_flags = [&](CLI::App* sub, std::vector<CLI::Option*>& opts) {
        opts.push_back(sub->add_option("--localizer", localizer, "starburst|excuse|else|patch"));
        opts.push_back(sub->add_option("--crop", crop, "half_image|fixed_60"));
        opts.push_back(sub->add_option("--smoothing", smoothing, "none|mov_avg"));
        opts.push_back(sub->add_option("--method", method, "rapd_index|pearson|spearman|kendall"));
        opts.push_back(sub->add_option("--classifier", classifier, "Weight file for the patch localizer"));
        opts.push_back(sub->add_option("--threshold", threshold, "Decision threshold on the score"));
    };

    auto* gen = cli.add_subcommand("generate", "Write a synthetic ground-truthed corpus");
    int count = 32;
    std::string params_path, corpus_out;
    double alpha_min = 0.2, alpha_max = 0.6;
    auto* o_count = gen->add_option("--count", count, "Cases per class");
    gen->add_option("--params", params_path, "JSON file with simulation parameters");
    auto* o_amin = gen->add_option("--alpha-min", alpha_min, "Lower bound of the affected-eye gain");
    auto* o_amax = gen->add_option("--alpha-max", alpha_max, "Upper bound of the affected-eye gain");
    gen->add_option("--out", corpus_out, "Corpus directory (default <output-dir>/corpus)");

    std::string case_dir;
    auto* assess = cli.add_subcommand("assess", "Run the full pipeline on one case");
    assess->add_option("case_dir", case_dir, "Case directory")->required();
    std::vector<CLI::Option*> assess_opts;
    add_run_flags(assess, assess_opts);

    auto* meas = cli.add_subcommand("measure", "Write per-frame pupil measurements of one case");
    meas->add_option("case_dir", case_dir, "Case directory")->required();
    std::vector<CLI::Option*> measure_opts;
    add_run_flags(meas, measure_opts);

    std::string corpus;
    std::string localizers = "starburst,excuse,else", crops = "half_image", smoothings = "none,mov_avg",
                methods = "rapd_index";
    auto* eval = cli.add_subcommand("evaluate", "Benchmark a configuration grid over a corpus");
    eval->add_option("corpus", corpus, "Corpus directory")->required();
    auto* o_locs = eval->add_option("--localizers", localizers, "Comma-separated localizers");
    auto* o_crops = eval->add_option("--crops", crops, "Comma-separated crop modes");
    auto* o_smooth = eval->add_option("--smoothings", smoothings, "Comma-separated smoothing modes");
    auto* o_methods = eval->add_option("--methods", methods, "Comma-separated scoring methods");
    auto* o_eval_cls = eval->add_option("--classifier", classifier, "Weight file for the patch localizer");

    auto* train = cli.add_subcommand("train-baseline", "Train the logistic patch classifier on a corpus");
    train->add_option("corpus", corpus, "Corpus directory")->required();
    int patch_size = app::kRuntimePatchSize, epochs = 20, frame_stride = 5;
    std::string weights_out;
    auto* o_patch = train->add_option("--patch-size", patch_size, "Tile side in pixels");
    auto* o_epochs = train->add_option("--epochs", epochs, "Training epochs");
    auto* o_stride = train->add_option("--frame-stride", frame_stride, "Use every n-th frame");
    train->add_option("--out", weights_out, "Weight file (default <output-dir>/baseline_classifier.json)");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : app::kParameterError;
    }

    try {
        ConfigFile config;
        config.load(config_path);
        config.apply(o_out, "output_dir", output_dir);
        config.apply(o_workers, "workers", workers);
        config.apply(o_seed, "seed", seed);

        app::RunConfig run;
        run.seed = seed;
        run.workers = workers;
        run.output_dir = output_dir;
        auto finish_run = [&](const std::vector<CLI::Option*>& opts) {
            const char* keys[] = {"localizer", "crop", "smoothing", "method", "classifier", "threshold"};
            config.apply(opts[0], keys[0], localizer);
            config.apply(opts[1], keys[1], crop);
            config.apply(opts[2], keys[2], smoothing);
            config.apply(opts[3], keys[3], method);
            config.apply(opts[4], keys[4], classifier);
            config.apply(opts[5], keys[5], threshold);
            run.localizer = parse_localizer(localizer);
            run.crop = measure::parse_crop(crop);
            run.smoothing = reflex::parse_smoothing(smoothing);
            run.method = reflex::parse_method(method);
            if (!classifier.empty()) run.classifier_path = classifier;
            run.threshold = threshold;
        };

        if (gen->parsed()) {
            config.apply(o_count, "count", count);
            config.apply(o_amin, "alpha_min", alpha_min);
            config.apply(o_amax, "alpha_max", alpha_max);
            app::GenerateOptions g;
            g.out_dir = corpus_out.empty() ? std::filesystem::path(output_dir) / "corpus" : std::filesystem::path(corpus_out);
            g.count_per_class = count;
            g.seed = seed;
            g.alpha_min = alpha_min;
            g.alpha_max = alpha_max;
            g.workers = workers;
            if (!params_path.empty()) {
                std::ifstream in(params_path);
                if (!in) throw IngestionError("cannot read params file " + params_path);
                std::stringstream ss;
                ss << in.rdbuf();
                g.params = app::sim_params_from_json(ss.str());
            }
            app::cmd_generate(g, std::cout);
        } else if (assess->parsed()) {
            finish_run(assess_opts);
            app::cmd_assess(case_dir, run, std::cout);
        } else if (meas->parsed()) {
            finish_run(measure_opts);
            app::cmd_measure(case_dir, run, std::cout);
        } else if (eval->parsed()) {
            config.apply(o_locs, "localizers", localizers);
            config.apply(o_crops, "crops", crops);
            config.apply(o_smooth, "smoothings", smoothings);
            config.apply(o_methods, "methods", methods);
            config.apply(o_eval_cls, "classifier", classifier);
            if (!classifier.empty()) run.classifier_path = classifier;
            app::GridConfig grid;
            grid.localizers = parse_list<LocalizerKind>(localizers, parse_localizer);
            grid.crops = parse_list<measure::CropMode>(crops, measure::parse_crop);
            grid.smoothings = parse_list<reflex::Smoothing>(smoothings, reflex::parse_smoothing);
            grid.methods = parse_list<reflex::ScoreMethod>(methods, reflex::parse_method);
            app::cmd_evaluate(corpus, grid, run, std::cout);
        } else if (train->parsed()) {
            config.apply(o_patch, "patch_size", patch_size);
            config.apply(o_epochs, "epochs", epochs);
            config.apply(o_stride, "frame_stride", frame_stride);
            app::TrainBaselineOptions t;
            t.corpus = corpus;
            t.out_path = weights_out.empty() ? std::filesystem::path(output_dir) / "baseline_classifier.json"
                                             : std::filesystem::path(weights_out);
            t.data.patch_size = patch_size;
            t.data.frame_stride = frame_stride;
            t.data.seed = seed;
            t.train.epochs = epochs;
            t.train.seed = seed;
            t.split.seed = seed;
            app::cmd_train_baseline(t, std::cout);
        }
    } catch (...) {
        return app::exit_code_for_current_exception(std::cerr);
    }
    return app::kOk;
}
