#ifndef CSCD_EMBEDDING_HPP
#define CSCD_EMBEDDING_HPP

#include "cscd/dataset.hpp"
#include "cscd/parameters.hpp"
#include "cscd/tape.hpp"

#include <span>

namespace cscd {

/// Sizes that fix every embedding parameter shape.
struct EmbeddingDims {
    int learners = 0;
    int exercises = 0;
    int concepts = 0;
    int prereq_edges = 0;
    int dep_edges = 0;
    int dim = 32;

    int relation_slots() const noexcept { return prereq_edges + dep_edges; }
};

/// Personalized concept and relation vectors for a block of U learners.
/// Rows are learner-major: row u*K + k is concept k of the u-th learner, and
/// likewise for edges.
struct PersonalizedGraphState {
    Var concepts;
    Var prereq_edges;
    Var dep_edges;
    int learner_block = 0;
};

struct ExerciseFeatures {
    Var difficulty;     ///< [B x K], in (0,1)
    Var discrimination; ///< [B x 1], in (0,1)
    Var qmask;          ///< [B x K] constant 0/1
};

/// Trainable one-hot embeddings for concepts, relations, learners, their
/// personalized combinations and exercise difficulty/discrimination.
///
/// One-hot tables are stored transposed ([count x d] instead of [d x count])
/// so that multiplying by a one-hot column is a row gather.
///
/// Parameters (prefix "embed."):
///   concept.W [K x d], concept.b [1 x d]
///   relation.W [R x d], relation.b [1 x d]   R = one slot per edge instance,
///                                              prereq edges first then dep edges
///   learner.W [N x d], learner.b [1 x d]
///   personal_concept.W [d x 2d], .b [1 x d]
///   personal_relation.W [d x 2d], .b [1 x d]  shared by both relation kinds
///   difficulty.W [M x K], .b [1 x K]
///   discrimination.W [M x 1], .b [1 x 1]
class Embedding {
public:
    explicit Embedding(const EmbeddingDims& dims) : dims_(dims) {}

    const EmbeddingDims& dims() const noexcept { return dims_; }

    void add_parameters(ParameterStore& store) const;

    /// sigmoid(W_s * onehot(n) + b_s) for each learner: [U x d].
    Var learner_vectors(Tape& tape, ParameterStore& store, std::span<const int> learners) const;
    /// sigmoid(W_k * onehot(k) + b_k) for all concepts: [K x d].
    Var concept_vectors(Tape& tape, ParameterStore& store) const;
    /// Base relation embeddings for all edge slots: [R x d].
    Var relation_vectors(Tape& tape, ParameterStore& store) const;

    /// h_{n,k} for every learner in the block and every concept: [(U*K) x d].
    Var embed_concepts(Tape& tape, ParameterStore& store, std::span<const int> learners) const;
    /// Personalized prereq and dep edge vectors: [(U*P) x d] and [(U*D) x d].
    std::pair<Var, Var> embed_relations(Tape& tape, ParameterStore& store, std::span<const int> learners) const;
    PersonalizedGraphState personalize(Tape& tape, ParameterStore& store, std::span<const int> learners) const;

    ExerciseFeatures exercise_features(Tape& tape, ParameterStore& store, std::span<const int> exercises,
                                       const QMatrix& qmatrix) const;

private:
    Var personalize_rows(Tape& tape, ParameterStore& store, Var learner_vecs, Var base, std::size_t per_learner,
                         const char* weight, const char* bias) const;
    std::pair<Var, Var> relations_for(Tape& tape, ParameterStore& store, Var learner_vecs) const;
    void check_learners(std::span<const int> learners) const;

    EmbeddingDims dims_;
};

} // namespace cscd

#endif
