#include "cscd/diagnosis.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

namespace cscd {

using nlohmann::json;

namespace {

json to_json_object(const CognitiveDiagnosis& d, const ConceptGraph& graph) {
    json ks = json::array();
    for (std::size_t k = 0; k < d.ks.size(); ++k) {
        ks.push_back({{"concept_id", k}, {"name", graph.name(static_cast<int>(k))}, {"score", d.ks[k]}});
    }
    json kus = json::array();
    for (const KusScore& s : d.kus) {
        kus.push_back({{"src", s.edge.src}, {"dst", s.edge.dst}, {"kind", to_string(s.kind)}, {"score", s.score}});
    }
    return json{{"learner_id", d.learner}, {"ks", ks}, {"kus", kus}};
}

std::string check_object(const json& j) {
    if (!j.is_object()) return "diagnosis must be an object";
    if (!j.contains("learner_id") || !j["learner_id"].is_number_integer()) return "learner_id must be an integer";
    if (!j.contains("ks") || !j["ks"].is_array()) return "ks must be an array";
    if (!j.contains("kus") || !j["kus"].is_array()) return "kus must be an array";
    for (const json& e : j["ks"]) {
        if (!e.is_object() || !e.contains("concept_id") || !e["concept_id"].is_number_integer()) return "ks entry needs integer concept_id";
        if (!e.contains("name") || !e["name"].is_string()) return "ks entry needs string name";
        if (!e.contains("score") || !e["score"].is_number()) return "ks entry needs numeric score";
        const double s = e["score"].get<double>();
        if (!(s > 0.0 && s < 1.0)) return "ks score outside (0,1)";
    }
    for (const json& e : j["kus"]) {
        if (!e.is_object() || !e.contains("src") || !e["src"].is_number_integer() || !e.contains("dst") ||
            !e["dst"].is_number_integer()) {
            return "kus entry needs integer src and dst";
        }
        if (!e.contains("kind") || !e["kind"].is_string() || (e["kind"] != "prereq" && e["kind"] != "dep")) {
            return "kus kind must be prereq or dep";
        }
        if (!e.contains("score") || !e["score"].is_number()) return "kus entry needs numeric score";
        const double s = e["score"].get<double>();
        if (!(s > 0.0 && s < 1.0)) return "kus score outside (0,1)";
    }
    return {};
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(ch);
        }
    }
    return out;
}

} // namespace

std::string diagnosis_to_json(const CognitiveDiagnosis& diagnosis, const ConceptGraph& graph, int indent) {
    return to_json_object(diagnosis, graph).dump(indent);
}

std::string diagnoses_to_json(const std::vector<CognitiveDiagnosis>& diagnoses, const ConceptGraph& graph, int indent) {
    json arr = json::array();
    for (const auto& d : diagnoses) arr.push_back(to_json_object(d, graph));
    return arr.dump(indent);
}

std::string validate_diagnosis_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        return std::string("not valid JSON: ") + e.what();
    }
    if (j.is_array()) {
        for (const json& item : j) {
            if (auto err = check_object(item); !err.empty()) return err;
        }
        return {};
    }
    return check_object(j);
}

std::string radar_svg(const CognitiveDiagnosis& diagnosis, const ConceptGraph& graph, std::size_t edge_axes) {
    struct Axis {
        std::string label;
        double score;
        bool structural;
    };
    std::vector<Axis> axes;
    for (std::size_t k = 0; k < diagnosis.ks.size(); ++k) {
        axes.push_back({"KS " + std::to_string(k) + " " + graph.name(static_cast<int>(k)), diagnosis.ks[k], false});
    }
    std::vector<std::size_t> order(diagnosis.kus.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(diagnosis.kus[a].score - 0.5) > std::abs(diagnosis.kus[b].score - 0.5);
    });
    order.resize(std::min(order.size(), edge_axes));
    for (std::size_t i : order) {
        const KusScore& s = diagnosis.kus[i];
        const char* arrow = s.kind == RelationKind::Prerequisite ? "->" : "--";
        axes.push_back({"KUS " + std::to_string(s.edge.src) + arrow + std::to_string(s.edge.dst), s.score, true});
    }

    constexpr double size = 640.0;
    constexpr double cx = size / 2.0;
    constexpr double cy = size / 2.0;
    constexpr double radius = 220.0;
    const std::size_t n = std::max<std::size_t>(axes.size(), 1);
    auto point = [&](std::size_t i, double r) {
        const double angle = -std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        return std::pair{cx + r * std::cos(angle), cy + r * std::sin(angle)};
    };

    std::ostringstream svg;
    char buf[256];
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 640 640\">\n";
    svg << "  <title>Learner " << diagnosis.learner << " cognitive structure</title>\n";
    svg << "  <rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
    for (double ring : {0.25, 0.5, 0.75, 1.0}) {
        svg << "  <polygon fill=\"none\" stroke=\"#cccccc\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            auto [x, y] = point(i, radius * ring);
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x, y);
            svg << buf;
        }
        svg << "\"/>\n";
    }
    for (std::size_t i = 0; i < axes.size(); ++i) {
        auto [x, y] = point(i, radius);
        auto [lx, ly] = point(i, radius + 24.0);
        std::snprintf(buf, sizeof buf, "  <line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#999999\"/>\n", cx,
                      cy, x, y);
        svg << buf;
        std::snprintf(buf, sizeof buf, "  <text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" text-anchor=\"middle\" fill=\"%s\">",
                      lx, ly, axes[i].structural ? "#b03030" : "#203080");
        svg << buf << xml_escape(axes[i].label) << "</text>\n";
    }
    if (!axes.empty()) {
        svg << "  <polygon fill=\"#3060c0\" fill-opacity=\"0.3\" stroke=\"#3060c0\" points=\"";
        for (std::size_t i = 0; i < axes.size(); ++i) {
            auto [x, y] = point(i, radius * axes[i].score);
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x, y);
            svg << buf;
        }
        svg << "\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace cscd
