#include "cscd/checkpoint.hpp"

#include "hash.hpp"

#include "cscd/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cscd {

using nlohmann::json;

json config_to_json(const TrainConfig& c) {
    return json{
        {"dim", c.model.dim},
        {"layers", c.model.layers},
        {"hidden1", c.model.hidden1},
        {"hidden2", c.model.hidden2},
        {"leaky_slope", c.model.leaky_slope},
        {"self_loops", c.model.self_loops},
        {"monotone_head", c.model.monotone_head},
        {"ablation", to_string(c.model.ablation)},
        {"batch_size", c.batch_size},
        {"learning_rate", c.learning_rate},
        {"dropout", c.dropout},
        {"max_epochs", c.max_epochs},
        {"patience", c.patience},
        {"min_delta", c.min_delta},
        {"seed", c.seed},
        {"split_ratio", {c.ratio.train, c.ratio.valid, c.ratio.test}},
    };
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    try {
        c.model.dim = j.value("dim", c.model.dim);
        c.model.layers = j.value("layers", c.model.layers);
        c.model.hidden1 = j.value("hidden1", c.model.hidden1);
        c.model.hidden2 = j.value("hidden2", c.model.hidden2);
        c.model.leaky_slope = j.value("leaky_slope", c.model.leaky_slope);
        c.model.self_loops = j.value("self_loops", c.model.self_loops);
        c.model.monotone_head = j.value("monotone_head", c.model.monotone_head);
        c.model.ablation = parse_ablation(j.value("ablation", std::string(to_string(c.model.ablation))));
        c.batch_size = j.value("batch_size", c.batch_size);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.dropout = j.value("dropout", c.dropout);
        c.max_epochs = j.value("max_epochs", c.max_epochs);
        c.patience = j.value("patience", c.patience);
        c.min_delta = j.value("min_delta", c.min_delta);
        c.seed = j.value("seed", c.seed);
        if (j.contains("split_ratio")) {
            const auto& r = j.at("split_ratio");
            c.ratio = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    return c;
}

std::string config_hash(const TrainConfig& config) {
    return hash::hex(hash::fnv1a(config_to_json(config).dump()));
}

json checkpoint_to_json(const Checkpoint& ck) {
    json params = json::array();
    for (const Parameter& p : ck.params) {
        params.push_back({{"name", p.name},
                          {"role", p.role == ParamRole::Bias ? "bias" : "weight"},
                          {"rows", p.value.rows()},
                          {"cols", p.value.cols()},
                          {"values", std::vector<double>(p.value.values().begin(), p.value.values().end())}});
    }
    const DatasetFingerprint& f = ck.fingerprint;
    return json{
        {"format", "cscd-checkpoint"},
        {"version", kCheckpointVersion},
        {"model", ck.model_kind},
        {"config", config_to_json(ck.config)},
        {"config_hash", config_hash(ck.config)},
        {"dataset",
         {{"learners", f.learners},
          {"exercises", f.exercises},
          {"concepts", f.concepts},
          {"prereq_edges", f.prereq_edges},
          {"dep_edges", f.dep_edges},
          {"structure_hash", f.structure_hash}}},
        {"epoch", ck.epoch},
        {"best_valid_auc", ck.best_valid_auc},
        {"params", params},
    };
}

Checkpoint checkpoint_from_json(const json& j) {
    Checkpoint ck;
    try {
        if (j.value("format", std::string()) != "cscd-checkpoint") throw ConfigError("not a cscd checkpoint");
        if (j.at("version").get<int>() != kCheckpointVersion) {
            throw ConfigError("unsupported checkpoint version " + std::to_string(j.at("version").get<int>()));
        }
        ck.model_kind = j.at("model").get<std::string>();
        ck.config = config_from_json(j.at("config"));
        if (j.contains("config_hash") && j.at("config_hash").get<std::string>() != config_hash(ck.config)) {
            throw ConfigError("checkpoint config hash mismatch");
        }
        const json& d = j.at("dataset");
        ck.fingerprint = {d.at("learners").get<int>(),  d.at("exercises").get<int>(),
                          d.at("concepts").get<int>(),  d.at("prereq_edges").get<int>(),
                          d.at("dep_edges").get<int>(), d.at("structure_hash").get<std::uint64_t>()};
        ck.epoch = j.at("epoch").get<int>();
        ck.best_valid_auc = j.at("best_valid_auc").get<double>();
        for (const json& p : j.at("params")) {
            const auto rows = p.at("rows").get<std::size_t>();
            const auto cols = p.at("cols").get<std::size_t>();
            Array value(rows, cols, p.at("values").get<std::vector<double>>());
            ck.params.add(p.at("name").get<std::string>(), std::move(value),
                          p.value("role", std::string("weight")) == "bias" ? ParamRole::Bias : ParamRole::Weight);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed checkpoint: ") + e.what());
    } catch (const DimensionError& e) {
        throw ConfigError(std::string("malformed checkpoint: ") + e.what());
    }
    if (!ck.params.all_finite()) throw ConfigError("checkpoint contains non-finite parameters");
    return ck;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << contents;
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    write_file_atomic(path, checkpoint_to_json(checkpoint).dump());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::exception& e) {
        throw ConfigError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
    }
    return checkpoint_from_json(j);
}

} // namespace cscd
