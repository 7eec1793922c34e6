#include "cscd/cli.hpp"

#include "hash.hpp"

#include "cscd/checkpoint.hpp"
#include "cscd/cscd_model.hpp"
#include "cscd/diagnosis.hpp"
#include "cscd/errors.hpp"
#include "cscd/metrics.hpp"
#include "cscd/synthetic.hpp"
#include "cscd/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace cscd::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string file_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "";
    std::ostringstream ss;
    ss << in.rdbuf();
    return hash::hex(hash::fnv1a(ss.str()));
}

/// Run record written next to a command's outputs.
struct Manifest {
    std::string command;
    std::vector<std::string> argv;
    json config = json::object();
    json inputs = json::object();
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    json timings = json::object();
    json extra = json::object();

    void input(const fs::path& path) { inputs[path.string()] = file_hash(path); }

    void write(const fs::path& dir, const std::string& status, const std::string& error) const {
        json j{{"command", command},
               {"argv", argv},
               {"status", status},
               {"config", config},
               {"inputs", inputs},
               {"seed", seed},
               {"outputs", outputs},
               {"timings_ms", timings}};
        if (!error.empty()) j["error"] = error;
        for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
        fs::create_directories(dir);
        write_file_atomic(dir / ("manifest-" + command + ".json"), j.dump(2) + "\n");
    }
};

class Stopwatch {
public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string default_output_dir() {
    const char* env = std::getenv(kOutputDirEnv);
    return env && *env ? env : ".";
}

struct TrainFlags {
    TrainConfig config;
    std::string ablation = "K+R";
    std::string model = "cscd";
    bool quiet = false;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    TrainConfig& c = f.config;
    cmd->add_option("--model", f.model, "Model kind")->check(CLI::IsMember({"cscd", "irt"}))->capture_default_str();
    cmd->add_option("--ablation", f.ablation, "Structure layer variant: K, R or K+R")->capture_default_str();
    cmd->add_option("--batch", c.batch_size, "Mini-batch size (8, 16, 32 or 64)")->capture_default_str();
    cmd->add_option("--lr", c.learning_rate, "Adam learning rate")->capture_default_str();
    cmd->add_option("--dropout", c.dropout, "Dropout rate of the prediction head")->capture_default_str();
    cmd->add_option("--epochs", c.max_epochs, "Maximum number of epochs")->capture_default_str();
    cmd->add_option("--patience", c.patience, "Epochs without improvement before stopping")->capture_default_str();
    cmd->add_option("--min-delta", c.min_delta, "Minimum validation AUC improvement")->capture_default_str();
    cmd->add_option("--seed", c.seed, "Seed for splitting, initialization, shuffling and dropout")->capture_default_str();
    cmd->add_option("--dim", c.model.dim, "Embedding dimension")->capture_default_str();
    cmd->add_option("--layers", c.model.layers, "Attention layers per channel")->capture_default_str();
    cmd->add_option("--hidden1", c.model.hidden1, "First hidden layer width")->capture_default_str();
    cmd->add_option("--hidden2", c.model.hidden2, "Second hidden layer width")->capture_default_str();
    cmd->add_option("--leaky-slope", c.model.leaky_slope, "LeakyReLU slope in attention")->capture_default_str();
    cmd->add_flag("!--no-self-loops", c.model.self_loops, "Exclude a node or edge from its own neighborhood");
    cmd->add_flag("--monotone-head", c.model.monotone_head, "Clamp head weights to be non-negative");
    cmd->add_option("--train-ratio", c.ratio.train, "Train share of each learner's responses")->capture_default_str();
    cmd->add_option("--valid-ratio", c.ratio.valid, "Validation share")->capture_default_str();
    cmd->add_option("--test-ratio", c.ratio.test, "Test share")->capture_default_str();
    cmd->add_flag("--quiet", f.quiet, "Do not print per-epoch progress");
}

Dataset load_data(const fs::path& dir, Manifest& m, std::ostream& err) {
    const DatasetPaths paths = DatasetPaths::in_directory(dir);
    LoadReport report;
    Dataset d = load_dataset(paths, &report, {});
    for (const fs::path& p : {paths.concepts, paths.relations, paths.qmatrix, paths.log}) m.input(p);
    if (report.duplicates_dropped > 0) err << "note: dropped " << report.duplicates_dropped << " duplicate responses\n";
    for (const std::string& w : report.warnings) err << "warning: " << w << '\n';
    return d;
}

TrainResult fit(const std::string& kind, const Dataset& data, const TrainConfig& config, bool quiet, std::ostream& err,
                const std::string& label) {
    auto model = make_model(kind, data, config);
    if (auto* cscd = dynamic_cast<const CscdModel*>(model.get())) {
        for (const std::string& w : cscd->warnings()) err << "warning: " << w << '\n';
    }
    return train(*model, data, config, [&](const EpochRecord& r) {
        if (!quiet) {
            char line[160];
            std::snprintf(line, sizeof line, "[%s] epoch %d loss %.6f valid_auc %s\n", label.c_str(), r.epoch,
                          r.train_loss, r.valid_defined ? std::to_string(r.valid.auc).c_str() : "n/a");
            err << line;
        }
        return true;
    });
}

std::string dataset_label(const fs::path& dir, const std::string& name) {
    if (!name.empty()) return name;
    const fs::path p = fs::absolute(dir).lexically_normal();
    std::string leaf = p.filename().string();
    if (leaf.empty()) leaf = p.parent_path().filename().string();
    return leaf.empty() ? "dataset" : leaf;
}

/// Common error mapping: prints the message, records a failed manifest when
/// an output directory is known, and returns the exit code.
int guarded(Manifest& m, const std::string& out_dir, std::ostream& err, const std::function<void()>& body) {
    Stopwatch total;
    std::string error;
    int code = kSuccess;
    try {
        body();
    } catch (const IoError& e) {
        error = e.what();
        code = kIo;
    } catch (const NumericalError& e) {
        error = e.what();
        code = kNumerical;
    } catch (const Error& e) {
        error = e.what();
        code = kValidation;
    } catch (const fs::filesystem_error& e) {
        error = e.what();
        code = kIo;
    } catch (const std::exception& e) {
        error = e.what();
        code = kValidation;
    }
    if (code != kSuccess) err << "error: " << error << '\n';
    m.timings["total"] = total.ms();
    if (!out_dir.empty()) {
        try {
            m.write(out_dir, code == kSuccess ? "ok" : "failed", error);
        } catch (const std::exception& e) {
            err << "error: could not write manifest: " << e.what() << '\n';
            if (code == kSuccess) code = kIo;
        }
    }
    return code;
}

json spec_to_json(const SyntheticSpec& s) {
    return {{"learners", s.learners},
            {"exercises", s.exercises},
            {"concepts", s.concepts},
            {"latent_dim", s.latent_dim},
            {"prereq_density", s.prereq_density},
            {"dep_density", s.dep_density},
            {"defect_rate", s.defect_rate},
            {"guess", s.guess},
            {"slip", s.slip},
            {"mastery_rate", s.mastery_rate},
            {"ability_weight", s.ability_weight},
            {"max_concepts_per_exercise", s.max_concepts_per_exercise},
            {"responses_per_learner", s.responses_per_learner},
            {"seed", s.seed}};
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cognitive structure diagnosis: synthetic data, training, evaluation and diagnosis"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with default option values (per-command sections)");
    std::string out_dir = default_output_dir();

    // generate
    SyntheticSpec spec;
    CLI::App* gen = app.add_subcommand("generate", "Write a synthetic dataset with planted ground truth");
    gen->add_option("--out", out_dir, "Output directory (default from $CSCD_OUTPUT_DIR or .)");
    gen->add_option("--learners", spec.learners)->capture_default_str();
    gen->add_option("--exercises", spec.exercises)->capture_default_str();
    gen->add_option("--concepts", spec.concepts)->capture_default_str();
    gen->add_option("--latent-dim", spec.latent_dim)->capture_default_str();
    gen->add_option("--prereq-density", spec.prereq_density)->capture_default_str();
    gen->add_option("--dep-density", spec.dep_density)->capture_default_str();
    gen->add_option("--defect-rate", spec.defect_rate, "Probability a learner misunderstands an edge")->capture_default_str();
    gen->add_option("--guess", spec.guess)->capture_default_str();
    gen->add_option("--slip", spec.slip)->capture_default_str();
    gen->add_option("--mastery-rate", spec.mastery_rate)->capture_default_str();
    gen->add_option("--ability-weight", spec.ability_weight, "Weight of the latent ability in mastery logits")->capture_default_str();
    gen->add_option("--max-concepts", spec.max_concepts_per_exercise, "Concepts per exercise upper bound")->capture_default_str();
    gen->add_option("--responses-per-learner", spec.responses_per_learner, "0 answers every exercise")->capture_default_str();
    gen->add_option("--seed", spec.seed)->capture_default_str();

    // train / ablate
    std::string data_dir;
    TrainFlags tf;
    CLI::App* trn = app.add_subcommand("train", "Fit a model and save the best checkpoint");
    trn->add_option("--data", data_dir, "Dataset directory")->required();
    trn->add_option("--out", out_dir, "Output directory (default from $CSCD_OUTPUT_DIR or .)");
    add_train_flags(trn, tf);

    TrainFlags af;
    std::string ablate_name;
    CLI::App* abl = app.add_subcommand("ablate", "Train the K, R and K+R variants and print one metrics row each");
    abl->add_option("--data", data_dir, "Dataset directory")->required();
    abl->add_option("--out", out_dir, "Output directory (default from $CSCD_OUTPUT_DIR or .)");
    abl->add_option("--name", ablate_name, "Dataset label in the report");
    add_train_flags(abl, af);

    // evaluate
    std::string checkpoint_path, split_name = "test", eval_name;
    bool header = false;
    CLI::App* ev = app.add_subcommand("evaluate", "Print model,dataset,split,auc,acc,rmse for one split");
    ev->add_option("--checkpoint", checkpoint_path)->required();
    ev->add_option("--data", data_dir, "Dataset directory")->required();
    ev->add_option("--split", split_name)->check(CLI::IsMember({"train", "valid", "test"}))->capture_default_str();
    ev->add_option("--name", eval_name, "Dataset label in the row (default: data directory name)");
    ev->add_flag("--header", header, "Print the CSV header first");
    std::string eval_out;
    ev->add_option("--out", eval_out, "Directory for the run manifest (none when omitted)");

    // diagnose
    std::vector<int> learners;
    std::string json_out, svg_dir, truth_dir, diag_out;
    std::size_t svg_edges = 8;
    CLI::App* dg = app.add_subcommand("diagnose", "Export knowledge state and structure state per learner");
    dg->add_option("--checkpoint", checkpoint_path)->required();
    dg->add_option("--data", data_dir, "Dataset directory")->required();
    dg->add_option("--learner", learners, "Learner ids (default: all)");
    dg->add_option("--output", json_out, "JSON file (default: standard output)");
    dg->add_option("--svg", svg_dir, "Directory for learner_<id>.svg radar charts");
    dg->add_option("--svg-edges", svg_edges, "Edge axes per radar chart")->capture_default_str();
    dg->add_option("--truth", truth_dir, "Directory with truth_ks.csv/truth_kus.csv for recovery scoring");
    dg->add_option("--out", diag_out, "Directory for the run manifest (none when omitted)");

    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    }

    Manifest m;
    m.argv = args;

    if (*gen) {
        m.command = "generate";
        m.config = spec_to_json(spec);
        m.seed = spec.seed;
        return guarded(m, out_dir, err, [&] {
            spec.validate();
            Stopwatch t;
            const SyntheticDataset s = generate(spec);
            m.timings["generate"] = t.ms();
            fs::create_directories(out_dir);
            const DatasetPaths paths = DatasetPaths::in_directory(out_dir);
            write_dataset(s.dataset, paths);
            write_truth(s.truth, s.dataset.graph, out_dir);
            for (const fs::path& p : {paths.concepts, paths.relations, paths.qmatrix, paths.log,
                                      fs::path(out_dir) / "truth_ks.csv", fs::path(out_dir) / "truth_kus.csv"}) {
                m.outputs.push_back(p.string());
            }
            const DatasetStats st = s.dataset.stats();
            m.extra["stats"] = {{"learners", st.learners}, {"exercises", st.exercises}, {"concepts", st.concepts},
                                {"logs", st.logs}, {"prereq_edges", s.dataset.graph.prerequisites().size()},
                                {"dep_edges", s.dataset.graph.dependencies().size()}};
            out << "wrote " << m.outputs.size() << " files to " << out_dir << '\n';
        });
    }

    if (*trn) {
        m.command = "train";
        m.seed = tf.config.seed;
        return guarded(m, out_dir, err, [&] {
            tf.config.model.ablation = parse_ablation(tf.ablation);
            tf.config.validate();
            m.config = config_to_json(tf.config);
            m.config["model_kind"] = tf.model;
            m.config["data"] = data_dir;
            std::vector<std::string> warnings;
            Stopwatch t;
            const Dataset data = with_splits(load_data(data_dir, m, err), tf.config, &warnings);
            for (const std::string& w : warnings) err << "warning: " << w << '\n';
            m.timings["load"] = t.ms();
            Stopwatch tt;
            const TrainResult r = fit(tf.model, data, tf.config, tf.quiet, err, tf.model);
            m.timings["train"] = tt.ms();
            fs::create_directories(out_dir);
            const fs::path ck = fs::path(out_dir) / "checkpoint.json";
            const fs::path log = fs::path(out_dir) / "train_log.csv";
            save_checkpoint(r.checkpoint, ck);
            write_file_atomic(log, r.log.to_csv());
            m.outputs = {ck.string(), log.string()};
            m.extra["best_epoch"] = r.log.best_epoch;
            m.extra["epochs_run"] = r.log.epochs.size();
            m.extra["best_valid_auc"] = r.checkpoint.best_valid_auc;
            out << "best epoch " << r.log.best_epoch << " of " << r.log.epochs.size() << ", checkpoint " << ck.string()
                << '\n';
        });
    }

    if (*abl) {
        m.command = "ablate";
        m.seed = af.config.seed;
        return guarded(m, out_dir, err, [&] {
            af.config.validate();
            m.config = config_to_json(af.config);
            m.config["data"] = data_dir;
            const Dataset data = with_splits(load_data(data_dir, m, err), af.config, nullptr);
            const std::string name = dataset_label(data_dir, ablate_name);
            std::string report = metrics_csv_header() + "\n";
            for (Ablation mode : {Ablation::KnowledgeOnly, Ablation::RelationOnly, Ablation::Full}) {
                TrainConfig c = af.config;
                c.model.ablation = mode;
                Stopwatch t;
                TrainResult r = fit("cscd", data, c, af.quiet, err, to_string(mode));
                m.timings[to_string(mode)] = t.ms();
                auto model = make_model("cscd", data, c);
                const MetricReport rep = evaluate(*model, r.checkpoint.params, data.log, Split::Test);
                report += metrics_csv_row(std::string("CSCD-") + to_string(mode), name, "test", rep) + "\n";
            }
            fs::create_directories(out_dir);
            const fs::path csv = fs::path(out_dir) / "ablation.csv";
            write_file_atomic(csv, report);
            m.outputs = {csv.string()};
            out << report;
        });
    }

    if (*ev) {
        m.command = "evaluate";
        return guarded(m, eval_out, err, [&] {
            const Checkpoint ck = load_checkpoint(checkpoint_path);
            m.input(checkpoint_path);
            m.seed = ck.config.seed;
            m.config = {{"checkpoint", checkpoint_path}, {"data", data_dir}, {"split", split_name}};
            const Dataset data = with_splits(load_data(data_dir, m, err), ck.config, nullptr);
            auto model = make_model(ck, data);
            ParameterStore params = ck.params;
            const MetricReport rep = evaluate(*model, params, data.log, parse_split(split_name));
            const std::string label = ck.model_kind == "cscd"
                                          ? std::string("CSCD-") + to_string(ck.config.model.ablation)
                                          : std::string("IRT");
            if (header) out << metrics_csv_header() << '\n';
            const std::string row = metrics_csv_row(label, dataset_label(data_dir, eval_name), split_name, rep);
            out << row << '\n';
            m.extra["row"] = row;
        });
    }

    if (*dg) {
        m.command = "diagnose";
        return guarded(m, diag_out, err, [&] {
            const Checkpoint ck = load_checkpoint(checkpoint_path);
            m.input(checkpoint_path);
            m.seed = ck.config.seed;
            m.config = {{"checkpoint", checkpoint_path}, {"data", data_dir}, {"learners", learners}};
            const Dataset data = load_data(data_dir, m, err);
            if (ck.model_kind != "cscd") throw ConfigError("diagnose needs a cscd checkpoint, got '" + ck.model_kind + "'");
            auto model = make_model(ck, data);
            const auto& cscd = dynamic_cast<const CscdModel&>(*model);
            if (learners.empty()) {
                for (int n = 0; n < data.learner_count; ++n) learners.push_back(n);
            }
            for (int n : learners) {
                if (n < 0 || n >= data.learner_count) {
                    throw IndexError("unknown learner " + std::to_string(n) + " (valid range 0.." +
                                     std::to_string(data.learner_count - 1) + ")");
                }
            }
            ParameterStore params = ck.params;
            std::vector<CognitiveDiagnosis> diags;
            for (int n : learners) diags.push_back(cscd.diagnose(params, n));
            const std::string text = diagnoses_to_json(diags, data.graph) + "\n";
            if (json_out.empty()) {
                out << text;
            } else {
                write_file_atomic(json_out, text);
                m.outputs.push_back(json_out);
            }
            if (!svg_dir.empty()) {
                fs::create_directories(svg_dir);
                for (const CognitiveDiagnosis& d : diags) {
                    const fs::path p = fs::path(svg_dir) / ("learner_" + std::to_string(d.learner) + ".svg");
                    write_file_atomic(p, radar_svg(d, data.graph, svg_edges));
                    m.outputs.push_back(p.string());
                }
            }
            if (!truth_dir.empty()) {
                const GroundTruth truth = load_truth(data.graph, data.learner_count, truth_dir);
                const RecoveryScore rs = recovery_score(diags, truth);
                m.extra["recovery"] = {{"ks_auc", rs.ks_auc}, {"kus_auc", rs.kus_auc},
                                       {"defect_lowest_quintile", rs.defect_lowest_quintile}};
                char line[160];
                std::snprintf(line, sizeof line, "recovery ks_auc %.4f kus_auc %.4f defect_lowest_quintile %.4f\n",
                              rs.ks_auc, rs.kus_auc, rs.defect_lowest_quintile);
                err << line;
            }
        });
    }
    return kValidation;
}

} // namespace cscd::cli
