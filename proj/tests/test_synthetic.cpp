#include "cscd/errors.hpp"
#include "cscd/synthetic.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace cscd;

namespace {

bool acyclic(const ConceptGraph& g) {
    const int k = g.concept_count();
    std::vector<int> indeg(static_cast<std::size_t>(k), 0);
    for (const Edge& e : g.prerequisites()) ++indeg[static_cast<std::size_t>(e.dst)];
    std::vector<int> ready;
    for (int i = 0; i < k; ++i)
        if (indeg[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
    int seen = 0;
    while (!ready.empty()) {
        const int n = ready.back();
        ready.pop_back();
        ++seen;
        for (const Edge& e : g.prerequisites())
            if (e.src == n && --indeg[static_cast<std::size_t>(e.dst)] == 0) ready.push_back(e.dst);
    }
    return seen == k;
}

std::vector<CognitiveDiagnosis> diagnoses_from_truth(const GroundTruth& truth, const ConceptGraph& g) {
    std::vector<CognitiveDiagnosis> out;
    for (int n = 0; n < truth.learners(); ++n) {
        CognitiveDiagnosis d;
        d.learner = n;
        for (int k = 0; k < truth.concepts(); ++k) d.ks.push_back(truth.masters(n, k) ? 0.9 : 0.1);
        for (RelationKind kind : {RelationKind::Prerequisite, RelationKind::Dependency}) {
            const auto& edges = g.edges(kind);
            for (std::size_t e = 0; e < edges.size(); ++e)
                d.kus.push_back({edges[e], kind, truth.understands(n, kind, static_cast<int>(e)) ? 0.8 : 0.2});
        }
        out.push_back(d);
    }
    return out;
}

} // namespace

TEST_CASE("a learner mastering everything answers everything without defects, guess or slip") {
    SyntheticSpec spec;
    spec.learners = 20;
    spec.defect_rate = 0.0;
    spec.guess = 0.0;
    spec.slip = 0.0;
    spec.mastery_rate = 1.0;
    SyntheticDataset s = generate(spec);
    for (const Response& r : s.dataset.log.entries) CHECK(r.score == 1);
}

TEST_CASE("one misunderstood edge fails the combined exercise while single-concept ones pass") {
    ConceptGraph g(3);
    g.add_prerequisite(0, 1);
    g.add_prerequisite(1, 2);
    g.add_dependency(0, 2);
    GroundTruth truth(1, 3, 2, 1);
    for (int k = 0; k < 3; ++k) truth.set_mastery(0, k, true);
    truth.set_understanding(0, RelationKind::Prerequisite, 1, false);

    for (int k = 0; k < 3; ++k) {
        const std::vector<int> single{k};
        CHECK(response_probability(truth, g, 0, single, 0.0, 0.0) == 1.0);
    }
    const std::vector<int> all{0, 1, 2};
    CHECK(response_probability(truth, g, 0, all, 0.0, 0.0) == 0.0);
    const std::vector<int> intact{0, 1};
    CHECK(response_probability(truth, g, 0, intact, 0.0, 0.0) == 1.0);
}

TEST_CASE("adding a mastery or understanding bit never lowers the success probability") {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        ConceptGraph g = testing::random_graph(rng, 6, 0.3, 0.3);
        const int p = static_cast<int>(g.prerequisites().size());
        const int d = static_cast<int>(g.dependencies().size());
        GroundTruth t(1, 6, p, d);
        for (int k = 0; k < 6; ++k) t.set_mastery(0, k, rng.bernoulli(0.7));
        for (int e = 0; e < p; ++e) t.set_understanding(0, RelationKind::Prerequisite, e, rng.bernoulli(0.7));
        for (int e = 0; e < d; ++e) t.set_understanding(0, RelationKind::Dependency, e, rng.bernoulli(0.7));
        std::vector<int> concepts;
        for (int k = 0; k < 6; ++k)
            if (rng.bernoulli(0.5)) concepts.push_back(k);
        if (concepts.empty()) concepts.push_back(0);
        const double guess = rng.uniform(0.0, 0.4), slip = rng.uniform(0.0, 0.4);
        const double before = response_probability(t, g, 0, concepts, guess, slip);

        GroundTruth more = t;
        const int which = static_cast<int>(rng.below(static_cast<std::uint64_t>(6 + p + d)));
        if (which < 6) more.set_mastery(0, which, true);
        else if (which < 6 + p) more.set_understanding(0, RelationKind::Prerequisite, which - 6, true);
        else more.set_understanding(0, RelationKind::Dependency, which - 6 - p, true);
        CHECK(response_probability(more, g, 0, concepts, guess, slip) >= before);
    }
}

TEST_CASE("generated prerequisite graphs are acyclic and exercises are well-formed") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        SyntheticSpec spec;
        spec.seed = seed;
        spec.learners = 5;
        spec.prereq_density = 0.3;
        SyntheticDataset s = generate(spec);
        CHECK(acyclic(s.dataset.graph));
        CHECK_NOTHROW(s.dataset.qmatrix.validate());
        for (int e = 0; e < spec.exercises; ++e) {
            const auto c = s.dataset.qmatrix.exercise_concepts(e);
            CHECK(c.size() >= 1);
            CHECK(c.size() <= 4);
        }
        for (const Edge& e : s.dataset.graph.dependencies()) {
            CHECK_FALSE(s.dataset.graph.has_prerequisite(e.src, e.dst));
            CHECK_FALSE(s.dataset.graph.has_prerequisite(e.dst, e.src));
        }
    }
}

TEST_CASE("generation is deterministic per seed") {
    SyntheticSpec spec;
    spec.learners = 40;
    SyntheticDataset a = generate(spec);
    SyntheticDataset b = generate(spec);
    CHECK(a.dataset.graph == b.dataset.graph);
    CHECK(a.dataset.qmatrix == b.dataset.qmatrix);
    CHECK(a.dataset.log.entries == b.dataset.log.entries);
    CHECK(a.truth == b.truth);
    spec.seed = 8;
    CHECK_FALSE(generate(spec).dataset.log.entries == a.dataset.log.entries);
}

TEST_CASE("default generation has the documented shape") {
    SyntheticDataset s = generate(SyntheticSpec{});
    DatasetStats st = s.dataset.stats();
    CHECK(st.learners == 200);
    CHECK(st.exercises == 50);
    CHECK(st.concepts == 20);
    CHECK(st.logs == 200u * 50u);
    CHECK(s.dataset.graph.edge_count() > 0);
}

TEST_CASE("responses per learner limits the log") {
    SyntheticSpec spec;
    spec.learners = 10;
    spec.responses_per_learner = 7;
    CHECK(generate(spec).dataset.log.size() == 70);
}

TEST_CASE("dataset and truth files round-trip") {
    SyntheticSpec spec;
    spec.learners = 25;
    SyntheticDataset s = generate(spec);
    testing::TempDir dir;
    write_dataset(s.dataset, DatasetPaths::in_directory(dir.path()));
    write_truth(s.truth, s.dataset.graph, dir.path());
    LoadOptions opts;
    opts.learner_count = spec.learners;
    opts.exercise_count = spec.exercises;
    Dataset back = load_dataset(DatasetPaths::in_directory(dir.path()), nullptr, opts);
    CHECK(back.graph == s.dataset.graph);
    CHECK(back.qmatrix == s.dataset.qmatrix);
    CHECK(back.log.entries == s.dataset.log.entries);
    CHECK(load_truth(back.graph, spec.learners, dir.path()) == s.truth);
}

TEST_CASE("malformed truth rows report file and line") {
    SyntheticSpec spec;
    spec.learners = 3;
    SyntheticDataset s = generate(spec);
    testing::TempDir dir;
    write_truth(s.truth, s.dataset.graph, dir.path());
    testing::write_text(dir / "truth_ks.csv", "learner_id,concept_id,bit\n0,0,1\n0,99,1\n");
    try {
        load_truth(s.dataset.graph, spec.learners, dir.path());
        FAIL("expected LoadError");
    } catch (const LoadError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("truth_ks.csv") != std::string::npos);
    }
}

TEST_CASE("invalid specs are rejected") {
    SyntheticSpec spec;
    spec.defect_rate = 1.5;
    CHECK_THROWS_AS(generate(spec), ConfigError);
    spec = {};
    spec.concepts = 1;
    CHECK_THROWS_AS(generate(spec), ConfigError);
    spec = {};
    spec.guess = -0.1;
    CHECK_THROWS_AS(generate(spec), ConfigError);
}

TEST_CASE("recovery scoring") {
    SyntheticSpec spec;
    spec.learners = 60;
    SyntheticDataset s = generate(spec);
    auto exact = diagnoses_from_truth(s.truth, s.dataset.graph);
    RecoveryScore r = recovery_score(exact, s.truth);
    CHECK(r.ks_auc == 1.0);
    CHECK(r.kus_auc == 1.0);

    Rng rng(2);
    auto noise = exact;
    for (auto& d : noise) {
        for (double& v : d.ks) v = rng.uniform();
        for (auto& e : d.kus) e.score = rng.uniform();
    }
    RecoveryScore rnd = recovery_score(noise, s.truth);
    CHECK(std::abs(rnd.ks_auc - 0.5) < 0.05);
    CHECK(std::abs(rnd.kus_auc - 0.5) < 0.05);
    CHECK(std::abs(rnd.defect_lowest_quintile - 0.2) < 0.06);
}

TEST_CASE("lowest-quintile rate on a hand-built learner") {
    ConceptGraph g(6);
    for (int k = 1; k < 6; ++k) g.add_dependency(0, k);
    GroundTruth t(1, 6, 0, 5);
    for (int k = 0; k < 6; k += 2) t.set_mastery(0, k, true);
    t.set_understanding(0, RelationKind::Dependency, 3, false);
    t.set_understanding(0, RelationKind::Dependency, 4, false);

    CognitiveDiagnosis d;
    d.learner = 0;
    d.ks = {0.9, 0.1, 0.8, 0.2, 0.7, 0.3};
    const double scores[5] = {0.6, 0.7, 0.8, 0.1, 0.5};
    for (int e = 0; e < 5; ++e) d.kus.push_back({g.dependencies()[static_cast<std::size_t>(e)], RelationKind::Dependency, scores[e]});
    const std::vector<CognitiveDiagnosis> one{d};
    RecoveryScore r = recovery_score(one, t);
    // one slot in the lowest fifth of 5 edges; edge 3 takes it, edge 4 ranks second
    CHECK(r.defect_lowest_quintile == 0.5);
    CHECK(r.kus_auc == 1.0);
}

TEST_CASE("single-class truth makes recovery undefined") {
    ConceptGraph g(2);
    g.add_dependency(0, 1);
    GroundTruth t(1, 2, 0, 1);
    t.set_mastery(0, 0, true);
    CognitiveDiagnosis d{0, {0.4, 0.6}, {{Edge{0, 1}, RelationKind::Dependency, 0.3}}};
    const std::vector<CognitiveDiagnosis> one{d};
    CHECK_THROWS_AS(recovery_score(one, t), UndefinedMetricError);
}
