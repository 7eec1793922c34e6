#ifndef CSCD_TESTS_SUPPORT_HPP
#define CSCD_TESTS_SUPPORT_HPP

#include "cscd/array.hpp"
#include "cscd/dataset.hpp"
#include "cscd/rng.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

namespace testing {

inline cscd::Array random_array(cscd::Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0) {
    cscd::Array a(rows, cols);
    for (double& v : a.values()) v = rng.uniform(lo, hi);
    return a;
}

/// Directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("cscd_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Random graph with a prerequisite DAG over a shuffled order and extra
/// dependency edges.
inline cscd::ConceptGraph random_graph(cscd::Rng& rng, int k, double prereq_p, double dep_p) {
    cscd::ConceptGraph g(k);
    std::vector<int> order(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (rng.bernoulli(prereq_p)) g.add_prerequisite(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (!g.has_prerequisite(i, j) && !g.has_prerequisite(j, i) && rng.bernoulli(dep_p)) g.add_dependency(i, j);
    return g;
}

inline cscd::QMatrix random_qmatrix(cscd::Rng& rng, int exercises, int concepts, int max_per_row = 3) {
    cscd::QMatrix q(exercises, concepts);
    for (int e = 0; e < exercises; ++e) {
        const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_per_row)));
        for (int i = 0; i < n; ++i) q.set(e, static_cast<int>(rng.below(static_cast<std::uint64_t>(concepts))));
    }
    return q;
}

} // namespace testing

#endif
