#include "rapd/app/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rapd/errors.hpp"

namespace rapd::app {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestionError("cannot write " + path.string());
    out << text;
    if (!out) throw IngestionError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a(std::uint64_t h, const std::string& bytes) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::optional<patch::ClassifierModel> load_model(const RunConfig& cfg, bool needed) {
    if (!needed) return std::nullopt;
    if (!cfg.classifier_path) throw ParameterError("the patch localizer requires --classifier <weight file>");
    return patch::load_classifier(*cfg.classifier_path);
}

std::string traces_csv(const CaseMeasurement& m) {
    std::ostringstream out;
    out << "frame_index,radius_right,radius_left\n";
    char buf[96];
    for (std::size_t i = 0; i < m.right->radii.size() && i < m.left->radii.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f\n", i, m.right->radii[i], m.left->radii[i]);
        out << buf;
    }
    return out.str();
}

}  // namespace

int exit_code_for_current_exception(std::ostream& err) {
    try {
        throw;
    } catch (const ParameterError& e) {
        err << "parameter error: " << e.what() << "\n";
        return kParameterError;
    } catch (const IngestionError& e) {
        err << "ingestion error: " << e.what() << "\n";
        return kIngestionError;
    } catch (const LoadError& e) {
        err << "load error: " << e.what() << "\n";
        return kIngestionError;
    } catch (const Error& e) {
        err << "pipeline failure: " << e.what() << "\n";
        return kPipelineFailure;
    } catch (const std::exception& e) {
        err << "pipeline failure: " << e.what() << "\n";
        return kPipelineFailure;
    }
}

fs::path default_output_dir() {
    const char* env = std::getenv("RAPD_OUTPUT_DIR");
    return env != nullptr && *env != '\0' ? fs::path(env) : fs::path("rapd_out");
}

synth::SimParams sim_params_from_json(const std::string& json_text) {
    synth::SimParams p;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("params file is not valid JSON: ") + e.what());
    }
    auto take = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(field);
        } catch (const nlohmann::json::exception&) {
            throw ParameterError(std::string("params field '") + key + "' has the wrong type");
        }
    };
    take("fps", p.fps);
    take("swings", p.swings);
    take("on_duration", p.on_duration);
    take("rest", p.rest);
    take("baseline_radius", p.r0);
    take("constriction_amplitude", p.amplitude);
    take("time_constant", p.time_constant);
    take("noise_sigma", p.noise_sigma);
    take("center_jitter", p.center_jitter);
    if (j.contains("frame_size")) {
        const auto& fsz = j["frame_size"];
        if (!fsz.is_array() || fsz.size() != 2) throw ParameterError("params field 'frame_size' must be [w, h]");
        p.width = fsz[0].get<int>();
        p.height = fsz[1].get<int>();
    }
    p.validate();
    return p;
}

synth::TestCase corpus_case(const GenerateOptions& opts, std::size_t index, bool render) {
    synth::SimParams p = opts.params;
    p.seed = synth::mix_seed(opts.seed, index);
    char id[32];
    std::snprintf(id, sizeof id, "case_%04zu", index);
    const bool positive = index >= static_cast<std::size_t>(opts.count_per_class);
    if (!positive) return synth::generate_case(p, false, std::nullopt, 1.0, id, render);
    std::mt19937_64 rng(synth::mix_seed(p.seed, 0xa1fa));
    const double alpha = std::uniform_real_distribution<double>(opts.alpha_min, opts.alpha_max)(rng);
    const auto eye = std::bernoulli_distribution(0.5)(rng) ? reflex::Eye::Right : reflex::Eye::Left;
    return synth::generate_case(p, true, eye, alpha, id, render);
}

CorpusSummary summarize_corpus(const fs::path& root) {
    CorpusSummary s;
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& f : files) {
        const auto rel = fs::relative(f, root).generic_string();
        if (rel == "corpus.json") continue;
        const auto bytes = read_text(f);
        h = fnv1a(fnv1a(h, rel), bytes);
        s.bytes += bytes.size();
    }
    for (const auto& dir : case_io::list_cases(root)) {
        const auto m = case_io::read_manifest(dir);
        ++s.cases;
        (m.rapd_positive ? s.positives : s.negatives)++;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    s.hash = buf;
    return s;
}

CorpusSummary cmd_generate(const GenerateOptions& opts, std::ostream& out) {
    if (opts.count_per_class < 1) throw ParameterError("count per class must be >= 1");
    if (!(opts.alpha_min > 0.0) || !(opts.alpha_max < 1.0) || opts.alpha_min > opts.alpha_max) {
        throw ParameterError("alpha range must satisfy 0 < alpha_min <= alpha_max < 1");
    }
    opts.params.validate();
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (ec || !fs::is_directory(opts.out_dir)) {
        throw IngestionError("cannot create output directory " + opts.out_dir.string());
    }
    const std::size_t total = 2 * static_cast<std::size_t>(opts.count_per_class);
    parallel_for(total, opts.workers, [&](std::size_t i) { case_io::write_case(corpus_case(opts, i), opts.out_dir); });
    const CorpusSummary s = summarize_corpus(opts.out_dir);
    nlohmann::ordered_json j;
    j["cases"] = s.cases;
    j["rapd_positive"] = s.positives;
    j["no_rapd"] = s.negatives;
    j["bytes"] = s.bytes;
    j["fnv1a64"] = s.hash;
    j["seed"] = opts.seed;
    write_text(opts.out_dir / "corpus.json", j.dump(2) + "\n");
    out << "corpus " << opts.out_dir.string() << ": " << s.cases << " cases (" << s.positives << " rapd_positive, "
        << s.negatives << " no_rapd), " << s.bytes << " bytes, fnv1a64 " << s.hash << "\n";
    return s;
}

AssessResult cmd_assess(const fs::path& case_dir, const RunConfig& cfg, std::ostream& out) {
    const auto model = load_model(cfg, cfg.localizer == LocalizerKind::Patch);
    const auto data = case_io::read_case(case_dir);
    const auto m = measure_case(data, cfg.localizer, cfg.crop, model ? &*model : nullptr);
    if (!m.ok()) throw TraceUnusable("case " + m.case_id + ": " + m.error);

    AssessResult r;
    r.case_id = m.case_id;
    r.score = score_case(m, cfg.smoothing, cfg.method);
    r.threshold = cfg.threshold.value_or(kDefaultThreshold);
    r.decision = r.score.value >= r.threshold;
    nlohmann::ordered_json j;
    j["case_id"] = r.case_id;
    j["method"] = reflex::to_string(cfg.method);
    j["smoothing"] = reflex::to_string(cfg.smoothing);
    j["localizer"] = to_string(cfg.localizer);
    j["crop"] = measure::to_string(cfg.crop);
    j["delta_r"] = r.score.delta_r ? nlohmann::ordered_json(*r.score.delta_r) : nlohmann::ordered_json(nullptr);
    j["delta_l"] = r.score.delta_l ? nlohmann::ordered_json(*r.score.delta_l) : nlohmann::ordered_json(nullptr);
    j["score"] = r.score.value;
    j["degenerate"] = r.score.degenerate;
    j["decision"] = case_io::label_name(r.decision);
    j["threshold"] = r.threshold;
    j["failed_frames"] = {{"right", m.right->failures}, {"left", m.left->failures}};
    r.json = j.dump(2) + "\n";
    write_text(cfg.output_dir / (r.case_id + "_traces.csv"), traces_csv(m));
    write_text(cfg.output_dir / (r.case_id + "_assessment.json"), r.json);
    out << r.json;
    return r;
}

void cmd_measure(const fs::path& case_dir, const RunConfig& cfg, std::ostream& out) {
    const auto model = load_model(cfg, cfg.localizer == LocalizerKind::Patch);
    const auto data = case_io::read_case(case_dir);
    const Localizer loc = make_localizer(cfg.localizer, model ? &*model : nullptr);
    for (reflex::Eye eye : {reflex::Eye::Right, reflex::Eye::Left}) {
        const auto trace = measure::measure_sequence(eye == reflex::Eye::Right ? data.right : data.left, loc, cfg.crop);
        const auto path = cfg.output_dir / (data.manifest.case_id + "_" + reflex::to_string(eye) + "_measurements.csv");
        write_text(path, measure::measurements_csv(trace));
        out << path.string() << ": " << trace.frames.size() << " frames, " << trace.failures << " failed\n";
    }
}

std::vector<BenchmarkRow> cmd_evaluate(const fs::path& corpus, const GridConfig& grid, const RunConfig& cfg,
                                       std::ostream& out) {
    const bool needs_model =
        std::find(grid.localizers.begin(), grid.localizers.end(), LocalizerKind::Patch) != grid.localizers.end();
    const auto model = load_model(cfg, needs_model);
    const auto cases = case_io::list_cases(corpus);
    if (cases.empty()) throw IngestionError("no cases found under " + corpus.string());
    const auto rows = evaluate(
        cases.size(), [&](std::size_t i) { return case_io::read_case(cases[i]); }, grid, model ? &*model : nullptr,
        cfg.workers);
    write_text(cfg.output_dir / "benchmark.csv", benchmark_csv(rows));
    for (const auto& r : rows) {
        write_text(cfg.output_dir / ("roc_" + r.slug() + ".csv"), metrics::roc_csv(r.roc));
        write_text(cfg.output_dir / ("scatter_" + r.slug() + ".csv"), scatter_csv(r));
    }
    out << benchmark_csv(rows);
    return rows;
}

TrainReport cmd_train_baseline(const TrainBaselineOptions& opts, std::ostream& out) {
    if (opts.train.epochs < 1) throw ParameterError("epochs must be >= 1");
    const auto cases = case_io::list_cases(opts.corpus);
    if (cases.empty()) throw IngestionError("no cases found under " + opts.corpus.string());
    auto report = train_from_cases(
        cases.size(), [&](std::size_t i) { return case_io::read_case(cases[i]); }, opts.data, opts.train, opts.split);
    patch::save_classifier(report.model, opts.out_path.string());
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "patches train/val/test: %zu/%zu/%zu\naccuracy train %.4f val %.4f test %.4f\nweights: %s\n",
                  report.train_size, report.val_size, report.test_size, report.train_accuracy, report.val_accuracy,
                  report.test_accuracy, opts.out_path.string().c_str());
    out << buf;
    return report;
}

}  // namespace rapd::app
