#include "cscd/dataset.hpp"

#include "csv.hpp"
#include "cscd/errors.hpp"
#include "cscd/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace cscd {

namespace csv {

bool split_record(const std::string& line, std::vector<std::string>& fields) {
    fields.clear();
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(std::move(cur));
    return !quoted;
}

std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace csv

namespace {

/// Line-oriented CSV reader that checks the header and reports file:line.
class CsvReader {
public:
    CsvReader(const std::filesystem::path& path, const std::vector<std::string>& header)
        : path_(path.string()), in_(path) {
        if (!in_) throw IoError("cannot open " + path_);
        std::string line;
        if (!std::getline(in_, line)) {
            empty_ = true;
            return;
        }
        line_ = 1;
        strip_bom(line);
        std::vector<std::string> fields;
        parse(line, fields);
        if (fields.size() != header.size()) fail("expected header '" + join(header) + "'");
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (csv::trim(fields[i]) != header[i]) fail("expected header '" + join(header) + "'");
        }
    }

    /// Next non-blank record; false at end of file.
    bool next(std::vector<std::string>& fields) {
        if (empty_) return false;
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (csv::trim(line).empty()) continue;
            parse(line, fields);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const { throw LoadError(path_, line_, what); }

    int integer(const std::string& field, const char* column) const {
        const std::string t = csv::trim(field);
        int value = 0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
        if (ec != std::errc{} || p != t.data() + t.size() || t.empty()) {
            fail(std::string("malformed ") + column + " '" + t + "'");
        }
        if (value < 0) fail(std::string("negative ") + column + " " + t);
        return value;
    }

    std::size_t line() const noexcept { return line_; }
    const std::string& path() const noexcept { return path_; }

private:
    void parse(std::string line, std::vector<std::string>& fields) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!csv::split_record(line, fields)) fail("unterminated quoted field");
    }

    static void strip_bom(std::string& line) {
        if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    }

    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
        return s;
    }

    std::string path_;
    std::ifstream in_;
    std::size_t line_ = 0;
    bool empty_ = false;
};

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

} // namespace

const char* to_string(RelationKind kind) { return kind == RelationKind::Prerequisite ? "prereq" : "dep"; }

const char* to_string(Split split) {
    switch (split) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
    }
    return "train";
}

Split parse_split(const std::string& text) {
    if (text == "train") return Split::Train;
    if (text == "valid") return Split::Valid;
    if (text == "test") return Split::Test;
    throw ConfigError("unknown split '" + text + "' (expected train, valid or test)");
}

// ConceptGraph

ConceptGraph::ConceptGraph(int concept_count, std::vector<std::string> names)
    : concept_count_(concept_count), names_(std::move(names)) {
    if (concept_count < 0) throw ConfigError("concept count must be non-negative");
    if (names_.empty()) {
        names_.reserve(static_cast<std::size_t>(concept_count));
        for (int k = 0; k < concept_count; ++k) names_.push_back("concept " + std::to_string(k));
    }
    if (static_cast<int>(names_.size()) != concept_count) throw DimensionError("concept name count differs from K");
}

void ConceptGraph::check_endpoint(int id, const char* what) const {
    if (id < 0 || id >= concept_count_) {
        throw IndexError(std::string(what) + " endpoint " + std::to_string(id) + " outside [0," +
                         std::to_string(concept_count_) + ")");
    }
}

void ConceptGraph::add_prerequisite(int src, int dst) {
    check_endpoint(src, "prereq");
    check_endpoint(dst, "prereq");
    if (src == dst) throw ContractError("prereq self-loop on concept " + std::to_string(src));
    if (has_prerequisite(src, dst)) {
        throw ContractError("duplicate prereq edge " + std::to_string(src) + "->" + std::to_string(dst));
    }
    prereq_.push_back({src, dst});
}

void ConceptGraph::add_dependency(int a, int b) {
    check_endpoint(a, "dep");
    check_endpoint(b, "dep");
    if (a == b) throw ContractError("dep self-loop on concept " + std::to_string(a));
    if (has_dependency(a, b)) {
        throw ContractError("duplicate dep edge {" + std::to_string(a) + "," + std::to_string(b) + "}");
    }
    dep_.push_back({std::min(a, b), std::max(a, b)});
}

const std::string& ConceptGraph::name(int concept_id) const {
    check_endpoint(concept_id, "concept");
    return names_[static_cast<std::size_t>(concept_id)];
}

bool ConceptGraph::has_prerequisite(int src, int dst) const {
    return std::find(prereq_.begin(), prereq_.end(), Edge{src, dst}) != prereq_.end();
}

bool ConceptGraph::has_dependency(int a, int b) const {
    return std::find(dep_.begin(), dep_.end(), Edge{std::min(a, b), std::max(a, b)}) != dep_.end();
}

ConceptGraph ConceptGraph::permuted(const std::vector<int>& perm) const {
    if (static_cast<int>(perm.size()) != concept_count_) throw DimensionError("permutation size differs from K");
    std::vector<std::string> names(names_.size());
    for (int k = 0; k < concept_count_; ++k) names[static_cast<std::size_t>(perm[k])] = names_[static_cast<std::size_t>(k)];
    ConceptGraph g(concept_count_, std::move(names));
    for (const Edge& e : prereq_) g.add_prerequisite(perm[e.src], perm[e.dst]);
    for (const Edge& e : dep_) g.add_dependency(perm[e.src], perm[e.dst]);
    return g;
}

// QMatrix

QMatrix::QMatrix(int exercises, int concepts)
    : exercises_(exercises), concepts_(concepts),
      bits_(static_cast<std::size_t>(exercises) * static_cast<std::size_t>(concepts), 0) {
    if (exercises < 0 || concepts < 0) throw ConfigError("Q-matrix dimensions must be non-negative");
}

void QMatrix::check_exercise(int exercise) const {
    if (exercise < 0 || exercise >= exercises_) {
        throw IndexError("exercise " + std::to_string(exercise) + " outside [0," + std::to_string(exercises_) + ")");
    }
}

void QMatrix::set(int exercise, int concept_id, bool value) {
    check_exercise(exercise);
    if (concept_id < 0 || concept_id >= concepts_) {
        throw IndexError("concept " + std::to_string(concept_id) + " outside [0," + std::to_string(concepts_) + ")");
    }
    bits_[static_cast<std::size_t>(exercise) * concepts_ + concept_id] = value ? 1 : 0;
}

bool QMatrix::at(int exercise, int concept_id) const {
    check_exercise(exercise);
    if (concept_id < 0 || concept_id >= concepts_) {
        throw IndexError("concept " + std::to_string(concept_id) + " outside [0," + std::to_string(concepts_) + ")");
    }
    return bits_[static_cast<std::size_t>(exercise) * concepts_ + concept_id] != 0;
}

std::vector<int> QMatrix::exercise_concepts(int exercise) const {
    check_exercise(exercise);
    std::vector<int> out;
    const std::size_t base = static_cast<std::size_t>(exercise) * concepts_;
    for (int k = 0; k < concepts_; ++k) {
        if (bits_[base + k]) out.push_back(k);
    }
    return out;
}

Array QMatrix::row(int exercise) const {
    check_exercise(exercise);
    Array r(1, static_cast<std::size_t>(concepts_));
    const std::size_t base = static_cast<std::size_t>(exercise) * concepts_;
    for (int k = 0; k < concepts_; ++k) r[k] = bits_[base + k];
    return r;
}

void QMatrix::validate() const {
    for (int e = 0; e < exercises_; ++e) {
        const std::size_t base = static_cast<std::size_t>(e) * concepts_;
        if (std::none_of(bits_.begin() + base, bits_.begin() + base + concepts_, [](auto b) { return b != 0; })) {
            throw ContractError("exercise " + std::to_string(e) + " has no concepts in the Q-matrix");
        }
    }
}

QMatrix QMatrix::permuted_concepts(const std::vector<int>& perm) const {
    if (static_cast<int>(perm.size()) != concepts_) throw DimensionError("permutation size differs from K");
    QMatrix q(exercises_, concepts_);
    for (int e = 0; e < exercises_; ++e)
        for (int k = 0; k < concepts_; ++k)
            if (at(e, k)) q.set(e, perm[k]);
    return q;
}

// ResponseLog / Dataset

std::vector<Response> ResponseLog::subset(Split split) const {
    std::vector<Response> out;
    for (const auto& r : entries)
        if (r.split == split) out.push_back(r);
    return out;
}

std::size_t ResponseLog::count(Split split) const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [split](const Response& r) { return r.split == split; }));
}

DatasetStats Dataset::stats() const {
    return {learner_count, qmatrix.exercise_count(), graph.concept_count(), log.size()};
}

DatasetPaths DatasetPaths::in_directory(const std::filesystem::path& dir) {
    return {dir / "concepts.csv", dir / "relations.csv", dir / "qmatrix.csv", dir / "log.csv"};
}

Dataset load_dataset(const DatasetPaths& paths, LoadReport* report, const LoadOptions& options) {
    for (const auto& p : {paths.concepts, paths.relations, paths.qmatrix, paths.log}) {
        if (!std::filesystem::exists(p)) throw IoError("missing input file " + p.string());
    }
    std::vector<std::string> f;

    // concepts
    std::map<int, std::string> names;
    {
        CsvReader r(paths.concepts, {"id", "name"});
        while (r.next(f)) {
            if (f.size() != 2) r.fail("expected 2 columns, got " + std::to_string(f.size()));
            const int id = r.integer(f[0], "id");
            if (!names.emplace(id, csv::trim(f[1])).second) r.fail("duplicate concept id " + std::to_string(id));
        }
    }
    const int K = static_cast<int>(names.size());
    std::vector<std::string> name_list;
    for (const auto& [id, name] : names) {
        if (id != static_cast<int>(name_list.size())) {
            throw LoadError(paths.concepts.string(), 0, "concept ids must be dense 0..K-1; missing " +
                                                            std::to_string(name_list.size()));
        }
        name_list.push_back(name);
    }
    Dataset ds;
    ds.graph = ConceptGraph(K, std::move(name_list));

    // relations
    {
        CsvReader r(paths.relations, {"src", "dst", "kind"});
        while (r.next(f)) {
            if (f.size() != 3) r.fail("expected 3 columns, got " + std::to_string(f.size()));
            const int src = r.integer(f[0], "src");
            const int dst = r.integer(f[1], "dst");
            const std::string kind = csv::trim(f[2]);
            if (src >= K || dst >= K) r.fail("unknown concept id in edge " + std::to_string(src) + "," + std::to_string(dst));
            try {
                if (kind == "prereq") {
                    ds.graph.add_prerequisite(src, dst);
                } else if (kind == "dep") {
                    ds.graph.add_dependency(src, dst);
                } else {
                    r.fail("unknown relation kind '" + kind + "'");
                }
            } catch (const ContractError& e) {
                r.fail(e.what());
            }
        }
    }

    // qmatrix
    std::vector<std::pair<int, int>> pairs;
    int max_exercise = -1;
    {
        CsvReader r(paths.qmatrix, {"exercise_id", "concept_id"});
        while (r.next(f)) {
            if (f.size() != 2) r.fail("expected 2 columns, got " + std::to_string(f.size()));
            const int e = r.integer(f[0], "exercise_id");
            const int k = r.integer(f[1], "concept_id");
            if (k >= K) r.fail("unknown concept id " + std::to_string(k));
            if (options.exercise_count && e >= *options.exercise_count) r.fail("unknown exercise id " + std::to_string(e));
            pairs.emplace_back(e, k);
            max_exercise = std::max(max_exercise, e);
        }
    }
    const int M = options.exercise_count.value_or(max_exercise + 1);
    ds.qmatrix = QMatrix(M, K);
    for (auto [e, k] : pairs) ds.qmatrix.set(e, k);
    try {
        ds.qmatrix.validate();
    } catch (const ContractError& e) {
        throw LoadError(paths.qmatrix.string(), 0, e.what());
    }

    // log
    std::vector<Response> raw;
    int max_learner = -1;
    {
        CsvReader r(paths.log, {"learner_id", "exercise_id", "score"});
        while (r.next(f)) {
            if (f.size() != 3) r.fail("expected 3 columns, got " + std::to_string(f.size()));
            const int s = r.integer(f[0], "learner_id");
            const int e = r.integer(f[1], "exercise_id");
            const std::string score_text = csv::trim(f[2]);
            if (score_text != "0" && score_text != "1") r.fail("non-binary score '" + score_text + "'");
            if (e >= M) r.fail("unknown exercise id " + std::to_string(e));
            if (options.learner_count && s >= *options.learner_count) r.fail("unknown learner id " + std::to_string(s));
            raw.push_back({s, e, score_text == "1" ? 1 : 0, Split::Train});
            max_learner = std::max(max_learner, s);
        }
    }
    ds.learner_count = options.learner_count.value_or(max_learner + 1);

    // keep-last deduplication on (learner, exercise)
    std::map<std::pair<int, int>, std::size_t> last;
    for (std::size_t i = 0; i < raw.size(); ++i) last[{raw[i].learner, raw[i].exercise}] = i;
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (last[{raw[i].learner, raw[i].exercise}] == i) {
            ds.log.entries.push_back(raw[i]);
        } else {
            ++dropped;
        }
    }
    if (report != nullptr) {
        report->duplicates_dropped = dropped;
        if (dropped > 0) report->warnings.push_back(std::to_string(dropped) + " duplicate response rows dropped");
    }
    return ds;
}

void write_dataset(const Dataset& dataset, const DatasetPaths& paths) {
    {
        auto out = open_out(paths.concepts);
        out << "id,name\n";
        for (int k = 0; k < dataset.graph.concept_count(); ++k) out << k << ',' << csv::escape(dataset.graph.name(k)) << '\n';
    }
    {
        auto out = open_out(paths.relations);
        out << "src,dst,kind\n";
        for (const Edge& e : dataset.graph.prerequisites()) out << e.src << ',' << e.dst << ",prereq\n";
        for (const Edge& e : dataset.graph.dependencies()) out << e.src << ',' << e.dst << ",dep\n";
    }
    {
        auto out = open_out(paths.qmatrix);
        out << "exercise_id,concept_id\n";
        for (int e = 0; e < dataset.qmatrix.exercise_count(); ++e)
            for (int k : dataset.qmatrix.exercise_concepts(e)) out << e << ',' << k << '\n';
    }
    {
        auto out = open_out(paths.log);
        out << "learner_id,exercise_id,score\n";
        for (const Response& r : dataset.log.entries) out << r.learner << ',' << r.exercise << ',' << r.score << '\n';
    }
}

ResponseLog split(const ResponseLog& log, const SplitRatio& ratio, std::uint64_t seed, std::vector<std::string>* warnings) {
    if (!(ratio.train > 0 && ratio.valid > 0 && ratio.test > 0)) throw ConfigError("split ratio components must be positive");
    const double total = ratio.train + ratio.valid + ratio.test;

    std::map<int, std::vector<std::size_t>> by_learner;
    for (std::size_t i = 0; i < log.entries.size(); ++i) by_learner[log.entries[i].learner].push_back(i);

    ResponseLog out = log;
    Rng rng(seed);
    for (auto& [learner, idx] : by_learner) {
        if (idx.size() < 3) {
            for (auto i : idx) out.entries[i].split = Split::Train;
            if (warnings != nullptr) {
                warnings->push_back("learner " + std::to_string(learner) + " has " + std::to_string(idx.size()) +
                                    " responses; all assigned to train");
            }
            continue;
        }
        rng.shuffle(idx);
        const double n = static_cast<double>(idx.size());
        auto n_valid = static_cast<std::size_t>(std::llround(n * ratio.valid / total));
        auto n_test = static_cast<std::size_t>(std::llround(n * ratio.test / total));
        n_valid = std::max<std::size_t>(n_valid, 1);
        n_test = std::max<std::size_t>(n_test, 1);
        while (n_valid + n_test >= idx.size()) {
            if (n_test >= n_valid && n_test > 1) --n_test;
            else --n_valid;
        }
        for (std::size_t j = 0; j < idx.size(); ++j) {
            Split s = Split::Train;
            if (j < n_test) s = Split::Test;
            else if (j < n_test + n_valid) s = Split::Valid;
            out.entries[idx[j]].split = s;
        }
    }
    return out;
}

} // namespace cscd
