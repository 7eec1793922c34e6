#ifndef CSCD_SYNTHETIC_HPP
#define CSCD_SYNTHETIC_HPP

#include "cscd/dataset.hpp"
#include "cscd/diagnosis.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cscd {

/// Parameters of the synthetic response generator.
struct SyntheticSpec {
    int learners = 200;
    int exercises = 50;
    int concepts = 20;
    /// Dimension of the latent ability that correlates mastery across concepts.
    int latent_dim = 2;
    double prereq_density = 0.12;
    double dep_density = 0.08;
    /// Probability that a learner does not understand a given edge.
    double defect_rate = 0.3;
    double guess = 0.2;
    double slip = 0.1;
    /// Mastery logit offset is logit(mastery_rate); the latent ability adds
    /// ability_weight * (theta_n . v_k) with theta_n ~ N(0, I) and
    /// v_k ~ N(0, I / latent_dim).
    double mastery_rate = 0.7;
    double ability_weight = 1.5;
    int max_concepts_per_exercise = 4;
    /// Exercises answered per learner; 0 means every exercise.
    int responses_per_learner = 0;
    std::uint64_t seed = 7;

    /// Throws ConfigError for probabilities outside [0,1], K < 2 or
    /// non-positive sizes.
    void validate() const;
};

/// Planted mastery bits (learner x concept) and edge-understanding bits
/// (learner x edge slot; prereq edges first, then dep edges).
class GroundTruth {
public:
    GroundTruth() = default;
    GroundTruth(int learners, int concepts, int prereq_edges, int dep_edges);

    int learners() const noexcept { return learners_; }
    int concepts() const noexcept { return concepts_; }
    int edge_slots() const noexcept { return prereq_ + dep_; }

    bool masters(int learner, int concept_id) const;
    void set_mastery(int learner, int concept_id, bool value);
    bool understands(int learner, RelationKind kind, int edge_index) const;
    void set_understanding(int learner, RelationKind kind, int edge_index, bool value);

    bool operator==(const GroundTruth&) const = default;

private:
    std::size_t slot(RelationKind kind, int edge_index) const;

    int learners_ = 0;
    int concepts_ = 0;
    int prereq_ = 0;
    int dep_ = 0;
    std::vector<std::uint8_t> mastery_;
    std::vector<std::uint8_t> understanding_;
};

struct SyntheticDataset {
    Dataset dataset;
    GroundTruth truth;
};

/// Probability of a correct answer under the conjunctive rule: 1 - slip when
/// the learner masters every concept of the exercise and understands every
/// edge joining two of them, otherwise guess.
double response_probability(const GroundTruth& truth, const ConceptGraph& graph, int learner,
                            std::span<const int> concepts, double guess, double slip);

/// Random prerequisite DAG (edges follow a random topological order), random
/// dependency edges, exercises of 1..max concepts grown along graph edges,
/// and Bernoulli responses from response_probability(). Deterministic per seed.
SyntheticDataset generate(const SyntheticSpec& spec);

/// truth_ks.csv (learner_id,concept_id,bit) and truth_kus.csv
/// (learner_id,src,dst,kind,bit) inside `dir`.
void write_truth(const GroundTruth& truth, const ConceptGraph& graph, const std::filesystem::path& dir);
GroundTruth load_truth(const ConceptGraph& graph, int learners, const std::filesystem::path& dir);

struct RecoveryScore {
    double ks_auc = 0.0;
    double kus_auc = 0.0;
    /// Fraction of not-understood edges whose KUS ranks in the lowest fifth
    /// (ceil(E/5) lowest scores) of the learner's edges.
    double defect_lowest_quintile = 0.0;
};

/// Pools KS scores against mastery bits and KUS scores against
/// understanding bits over the diagnosed learners. Throws
/// UndefinedMetricError when either pool is single-class.
RecoveryScore recovery_score(std::span<const CognitiveDiagnosis> diagnoses, const GroundTruth& truth);

} // namespace cscd

#endif
