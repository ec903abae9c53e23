#include "witb/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "witb/eval.hpp"
#include "witb/fusion.hpp"
#include "witb/hypotheses.hpp"
#include "witb/oracle.hpp"
#include "witb/report.hpp"
#include "witb/scene.hpp"

namespace witb {

namespace {

namespace fs = std::filesystem;

int code(ExitStatus s) { return static_cast<int>(s); }

// Failure to write an output file.
struct OutputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file || !(file << text)) throw OutputError("cannot write " + path);
}

struct InferenceFlags {
    std::string mode = "full";
    std::uint64_t seed = 0;
    std::size_t samples = 1000;
    double eta = 1.0;
    double dim_floor = 0.1;
    bool allow_empty = false;
    double audio_floor = 1e-6;
    unsigned threads = 1;
    std::uint64_t cap = kDefaultHypothesisCap;

    InferenceConfig config() const {
        InferenceConfig cfg;
        cfg.mode = *parse_mode(mode);
        cfg.fit.master_seed = seed;
        cfg.fit.n_samples = samples;
        cfg.fit.packing_efficiency = eta;
        cfg.fit.dim_floor = dim_floor;
        cfg.allow_empty_boxes = allow_empty;
        cfg.audio_floor = audio_floor;
        cfg.threads = threads;
        cfg.hypothesis_cap = cap;
        return cfg;
    }
};

void add_inference_flags(CLI::App* cmd, InferenceFlags& f) {
    cmd->add_option("--mode", f.mode, "full | audio | vision")
        ->check(CLI::IsMember({"full", "audio", "audio-only", "vision", "vision-only"}))
        ->capture_default_str();
    cmd->add_option("--seed", f.seed, "Master seed for dimension sampling")->capture_default_str();
    cmd->add_option("--samples", f.samples, "Monte Carlo trials per fit estimate")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--eta", f.eta, "Packing efficiency in (0, 1]")
        ->check(CLI::Validator(
            [](std::string& s) -> std::string {
                const double v = std::stod(s);
                return (v > 0.0 && v <= 1.0) ? "" : "must lie in (0, 1]";
            },
            "(0, 1]"))
        ->capture_default_str();
    cmd->add_option("--dim-floor", f.dim_floor, "Lower clamp for sampled extents (cm)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_flag("--allow-empty-boxes", f.allow_empty, "Admit placements with empty boxes");
    cmd->add_option("--audio-floor", f.audio_floor, "Lower clamp for classifier probabilities")
        ->check(CLI::Validator(
            [](std::string& s) -> std::string {
                const double v = std::stod(s);
                return (v >= 0.0 && v < 1.0) ? "" : "must lie in [0, 1)";
            },
            "[0, 1)"))
        ->capture_default_str();
    cmd->add_option("--threads", f.threads, "Worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--cap", f.cap, "Maximum hypothesis count")->capture_default_str();
}

ParsedScene read_scene(const std::string& path, std::ostream& err) {
    std::vector<std::string> warnings;
    ParsedScene scene = load_scene_file(path, &warnings);
    for (const auto& w : warnings) err << "warning: " << path << ":" << w << "\n";
    return scene;
}

std::string placement_text(std::span<const BoxIndex> row) {
    std::string s = "[";
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(row[i]);
    }
    return s + "]";
}

int cmd_enumerate(std::size_t objects, std::size_t boxes, bool allow_empty, bool list,
                  std::uint64_t cap, const std::string& output, std::ostream& out) {
    std::uint64_t count = 0;
    try {
        count = count_hypotheses(objects, boxes, allow_empty);
    } catch (const std::overflow_error&) {
        throw CapacityError("hypothesis count for " + std::to_string(objects) + " objects in " +
                            std::to_string(boxes) + " boxes exceeds 2^64");
    }
    if (count > cap) {
        throw CapacityError("hypothesis space has " + std::to_string(count) +
                            " placements, above the cap of " + std::to_string(cap));
    }
    std::string text = std::to_string(count) + "\n";
    if (list) {
        const HypothesisSet set = enumerate_hypotheses(objects, boxes, allow_empty, cap);
        for (std::size_t h = 0; h < set.size(); ++h) text += placement_text(set[h]) + "\n";
    }
    emit(text, output, out);
    return code(ExitStatus::success);
}

int cmd_eval(const std::string& reports_dir, const std::string& human, const CorrelationOptions& options,
             bool strict, const std::string& points_path, const std::string& output,
             std::ostream& out, std::ostream& err) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(reports_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::map<std::string, ScenarioTables> tables;
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        ReportSummary summary;
        try {
            summary = parse_report(buffer.str());
        } catch (const std::runtime_error& e) {
            throw EvalError(file.string() + ": " + e.what());
        }
        auto& by_scenario = tables[summary.mode];
        if (by_scenario.contains(summary.scenario_id)) {
            throw EvalError(file.string() + ": second " + summary.mode + " report for scenario " +
                            summary.scenario_id);
        }
        by_scenario.emplace(summary.scenario_id, std::move(summary.table));
    }
    if (tables.empty()) throw EvalError(reports_dir + ": no report files (*.json)");

    RatingsLoad ratings = load_ratings_file(human, strict);
    for (const auto& w : ratings.warnings) err << "warning: " << human << ": " << w << "\n";

    const EvalReport report = correlate(tables, ratings.ratings, options);
    if (!points_path.empty()) emit(points_csv(report), points_path, out);
    emit(serialize_eval_report(report), output, out);
    return code(ExitStatus::success);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hidden-object placement inference from visual fit and audio evidence", "witb"};
    app.require_subcommand(1);

    InferenceFlags infer_flags;
    std::string infer_scene;
    std::string infer_output;
    auto* infer_cmd = app.add_subcommand("infer", "Posterior placement marginals for a scene");
    infer_cmd->add_option("--scene", infer_scene, "Scene document")->required();
    add_inference_flags(infer_cmd, infer_flags);
    infer_cmd->add_option("-o,--output", infer_output, "Report path (default stdout)");

    std::size_t enum_objects = 0;
    std::size_t enum_boxes = 0;
    bool enum_allow_empty = false;
    bool enum_list = false;
    std::uint64_t enum_cap = kDefaultHypothesisCap;
    std::string enum_output;
    auto* enum_cmd = app.add_subcommand("enumerate", "Count (and list) placement hypotheses");
    enum_cmd->add_option("--objects", enum_objects, "Number of objects")->required()->check(CLI::PositiveNumber);
    enum_cmd->add_option("--boxes", enum_boxes, "Number of boxes")->required()->check(CLI::PositiveNumber);
    enum_cmd->add_flag("--allow-empty", enum_allow_empty, "Admit placements with empty boxes");
    enum_cmd->add_flag("--list", enum_list, "Print every placement after the count");
    enum_cmd->add_option("--cap", enum_cap, "Maximum hypothesis count")->capture_default_str();
    enum_cmd->add_option("-o,--output", enum_output, "Output path (default stdout)");

    std::string eval_reports;
    std::string eval_human;
    std::string eval_output;
    std::string eval_points;
    bool eval_strict = false;
    CorrelationOptions eval_options;
    auto* eval_cmd = app.add_subcommand("eval", "Correlate model reports with human ratings");
    eval_cmd->add_option("--reports", eval_reports, "Directory of report documents")
        ->required()
        ->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--human", eval_human, "Ratings table")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--exclude-below", eval_options.exclusion_threshold,
                         "Drop scenarios with split-half agreement below this")
        ->capture_default_str();
    eval_cmd->add_option("--seed", eval_options.seed, "Seed for split-half bisections")->capture_default_str();
    eval_cmd->add_option("--splits", eval_options.n_splits, "Number of split-half bisections")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    eval_cmd->add_flag("--per-participant", eval_options.per_participant,
                       "Pair individual ratings instead of per-cell means");
    eval_cmd->add_flag("--strict", eval_strict, "Treat rating-sum violations as errors");
    eval_cmd->add_option("--points", eval_points, "Also write paired points as CSV");
    eval_cmd->add_option("-o,--output", eval_output, "Report path (default stdout)");

    InferenceFlags oracle_flags;
    std::string oracle_scene;
    std::string oracle_output;
    bool oracle_generate = false;
    std::size_t gen_objects = 3;
    std::size_t gen_boxes = 2;
    double gen_confusion = 0.0;
    auto* oracle_cmd = app.add_subcommand(
        "oracle", "Brute-force reference report for a zero-variance scene, or generate a synthetic scene");
    auto* oracle_scene_opt = oracle_cmd->add_option("--scene", oracle_scene, "Scene document");
    auto* generate_flag =
        oracle_cmd->add_flag("--generate", oracle_generate, "Write a synthetic scene instead of a report");
    oracle_scene_opt->excludes(generate_flag);
    add_inference_flags(oracle_cmd, oracle_flags);
    oracle_cmd->add_option("--objects", gen_objects, "Synthetic scene: number of objects")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    oracle_cmd->add_option("--boxes", gen_boxes, "Synthetic scene: number of boxes")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    oracle_cmd->add_option("--confusion", gen_confusion, "Synthetic scene: audio confusion in [0, 1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    oracle_cmd->add_option("-o,--output", oracle_output, "Output path (default stdout)");

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.push_back("witb");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (oracle_cmd->parsed() && !oracle_generate && oracle_scene.empty()) {
            throw CLI::RequiredError("oracle needs --scene or --generate");
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? code(ExitStatus::success) : code(ExitStatus::usage_error);
    }

    try {
        if (infer_cmd->parsed()) {
            const ParsedScene scene = read_scene(infer_scene, err);
            const InferenceConfig cfg = infer_flags.config();
            emit(build_report(scene, cfg, infer(scene, cfg)), infer_output, out);
            return code(ExitStatus::success);
        }
        if (enum_cmd->parsed()) {
            return cmd_enumerate(enum_objects, enum_boxes, enum_allow_empty, enum_list, enum_cap,
                                 enum_output, out);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_reports, eval_human, eval_options, eval_strict, eval_points,
                            eval_output, out, err);
        }
        if (oracle_cmd->parsed()) {
            if (oracle_generate) {
                const SyntheticScene synthetic =
                    generate_scene(oracle_flags.seed, gen_objects, gen_boxes, gen_confusion);
                emit(serialize_scene(synthetic.scene), oracle_output, out);
                return code(ExitStatus::success);
            }
            const ParsedScene scene = read_scene(oracle_scene, err);
            const InferenceConfig cfg = oracle_flags.config();
            emit(build_report(scene, cfg, oracle_inference(scene, cfg)), oracle_output, out);
            return code(ExitStatus::success);
        }
    } catch (const SceneError& e) {
        err << "error: " << e.what() << "\n";
        return code(ExitStatus::validation_error);
    } catch (const CapacityError& e) {
        err << "error: " << e.what() << "\n";
        return code(ExitStatus::validation_error);
    } catch (const OracleError& e) {
        err << "error: " << e.what() << "\n";
        return code(ExitStatus::validation_error);
    } catch (const RatingsError& e) {
        err << "error: " << e.what() << "\n";
        return code(ExitStatus::validation_error);
    } catch (const EvalError& e) {
        err << "error: " << e.what() << "\n";
        return code(ExitStatus::validation_error);
    } catch (const UndefinedCorrelation& e) {
        err << "error: " << e.what() << "\n";
        return code(ExitStatus::validation_error);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return code(ExitStatus::validation_error);
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return code(ExitStatus::internal_error);
    }
    return code(ExitStatus::usage_error);
}

}  // namespace witb
