#ifndef CSCD_DIAGNOSIS_HPP
#define CSCD_DIAGNOSIS_HPP

#include "cscd/dataset.hpp"

#include <string>
#include <vector>

namespace cscd {

struct KusScore {
    Edge edge;
    RelationKind kind = RelationKind::Prerequisite;
    double score = 0.0;
};

/// Per-learner knowledge state (one scalar per concept) and knowledge
/// structure state (one scalar per edge of either kind), all in (0,1).
struct CognitiveDiagnosis {
    int learner = 0;
    std::vector<double> ks;
    std::vector<KusScore> kus;
};

/// {learner_id, ks: [{concept_id, name, score}], kus: [{src, dst, kind, score}]}
std::string diagnosis_to_json(const CognitiveDiagnosis& diagnosis, const ConceptGraph& graph, int indent = 2);
/// Array of diagnosis objects.
std::string diagnoses_to_json(const std::vector<CognitiveDiagnosis>& diagnoses, const ConceptGraph& graph,
                              int indent = 2);

/// Checks a parsed document against the export layout; returns an empty
/// string when valid, otherwise the first problem found.
std::string validate_diagnosis_json(const std::string& text);

/// Static radar chart: one axis per concept (KS) followed by the
/// `edge_axes` edges with the largest deviation from 0.5 (KUS).
std::string radar_svg(const CognitiveDiagnosis& diagnosis, const ConceptGraph& graph, std::size_t edge_axes = 8);

} // namespace cscd

#endif
