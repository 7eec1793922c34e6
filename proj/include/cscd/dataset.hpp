#ifndef CSCD_DATASET_HPP
#define CSCD_DATASET_HPP

#include "cscd/array.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cscd {

enum class RelationKind : std::uint8_t { Prerequisite, Dependency };

const char* to_string(RelationKind kind);

/// A concept-graph edge. Prerequisite edges read src -> dst; dependency edges
/// are stored with src < dst.
struct Edge {
    int src = 0;
    int dst = 0;

    auto operator<=>(const Edge&) const = default;
};

/// K concepts with directed prerequisite edges and undirected dependency edges.
class ConceptGraph {
public:
    ConceptGraph() = default;
    explicit ConceptGraph(int concept_count, std::vector<std::string> names = {});

    /// Adds src -> dst. Throws on self-loops, out-of-range ids and duplicates.
    void add_prerequisite(int src, int dst);
    /// Adds {a, b} in canonical orientation (min id first).
    void add_dependency(int a, int b);

    int concept_count() const noexcept { return concept_count_; }
    const std::string& name(int concept_id) const;
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<Edge>& prerequisites() const noexcept { return prereq_; }
    const std::vector<Edge>& dependencies() const noexcept { return dep_; }
    const std::vector<Edge>& edges(RelationKind kind) const {
        return kind == RelationKind::Prerequisite ? prereq_ : dep_;
    }
    std::size_t edge_count() const noexcept { return prereq_.size() + dep_.size(); }

    bool has_prerequisite(int src, int dst) const;
    bool has_dependency(int a, int b) const;

    /// Returns a relabeled copy: concept k becomes perm[k]. Edge order is preserved.
    ConceptGraph permuted(const std::vector<int>& perm) const;

    bool operator==(const ConceptGraph&) const = default;

private:
    void check_endpoint(int id, const char* what) const;

    int concept_count_ = 0;
    std::vector<std::string> names_;
    std::vector<Edge> prereq_;
    std::vector<Edge> dep_;
};

/// Binary exercise-by-concept incidence matrix.
class QMatrix {
public:
    QMatrix() = default;
    QMatrix(int exercises, int concepts);

    void set(int exercise, int concept_id, bool value = true);
    bool at(int exercise, int concept_id) const;

    int exercise_count() const noexcept { return exercises_; }
    int concept_count() const noexcept { return concepts_; }

    /// {k : q[e][k] = 1}, ascending.
    std::vector<int> exercise_concepts(int exercise) const;
    /// Row e as a [1 x K] array of 0/1.
    Array row(int exercise) const;

    /// Throws ContractError naming the first exercise without concepts.
    void validate() const;

    QMatrix permuted_concepts(const std::vector<int>& perm) const;

    bool operator==(const QMatrix&) const = default;

private:
    void check_exercise(int exercise) const;

    int exercises_ = 0;
    int concepts_ = 0;
    std::vector<std::uint8_t> bits_;
};

enum class Split : std::uint8_t { Train, Valid, Test };

const char* to_string(Split split);
Split parse_split(const std::string& text);

struct Response {
    int learner = 0;
    int exercise = 0;
    int score = 0;
    Split split = Split::Train;

    bool operator==(const Response&) const = default;
};

struct ResponseLog {
    std::vector<Response> entries;

    std::vector<Response> subset(Split split) const;
    std::size_t count(Split split) const;
    std::size_t size() const noexcept { return entries.size(); }
};

struct DatasetStats {
    int learners = 0;
    int exercises = 0;
    int concepts = 0;
    std::size_t logs = 0;

    bool operator==(const DatasetStats&) const = default;
};

struct Dataset {
    ConceptGraph graph;
    QMatrix qmatrix;
    ResponseLog log;
    int learner_count = 0;

    DatasetStats stats() const;
};

/// File locations of the four dataset CSVs.
struct DatasetPaths {
    std::filesystem::path concepts;
    std::filesystem::path relations;
    std::filesystem::path qmatrix;
    std::filesystem::path log;

    /// concepts.csv, relations.csv, qmatrix.csv, log.csv inside `dir`.
    static DatasetPaths in_directory(const std::filesystem::path& dir);
};

struct LoadOptions {
    /// Declared learner count; learner ids must be below it. Defaults to max id + 1.
    std::optional<int> learner_count;
    /// Declared exercise count; defaults to max Q-matrix exercise id + 1.
    std::optional<int> exercise_count;
};

struct LoadReport {
    std::size_t duplicates_dropped = 0;
    std::vector<std::string> warnings;
};

/// Parses and validates the four CSV files. Duplicate (learner, exercise)
/// rows keep the last occurrence. Throws IoError for unreadable files and
/// LoadError (file:line) for invalid rows.
Dataset load_dataset(const DatasetPaths& paths, LoadReport* report = nullptr, const LoadOptions& options = {});

/// Writes the dataset in the same CSV formats load_dataset() reads.
void write_dataset(const Dataset& dataset, const DatasetPaths& paths);

struct SplitRatio {
    double train = 7.0;
    double valid = 1.0;
    double test = 2.0;
};

/// Assigns split tags learner by learner: each learner's responses are
/// shuffled with a seeded generator and cut by the ratio. Learners with fewer
/// than three responses go entirely to train (one warning each). Entry order
/// is preserved; only tags change.
ResponseLog split(const ResponseLog& log, const SplitRatio& ratio, std::uint64_t seed,
                  std::vector<std::string>* warnings = nullptr);

/// Concept ids covered by exercise e (index error when e is out of range).
inline std::vector<int> exercise_concepts(const QMatrix& q, int exercise) { return q.exercise_concepts(exercise); }

} // namespace cscd

#endif
