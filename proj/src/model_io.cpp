#include "ellfit/model_io.hpp"

#include "ellfit/error.hpp"

#include <algorithm>
#include <array>
#include <fstream>

namespace ellfit {

nlohmann::json model_to_json(const EllipsoidModel& m) {
    const auto& g = m.geometry();
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return g.semiaxes[a] > g.semiaxes[b]; });

    nlohmann::json doc;
    doc["q"] = std::vector<double>(m.coeffs().vector().data(), m.coeffs().vector().data() + 10);
    doc["center"] = {g.center.x(), g.center.y(), g.center.z()};
    doc["semiaxes"] = {g.semiaxes[order[0]], g.semiaxes[order[1]], g.semiaxes[order[2]]};
    std::vector<double> rotation;
    for (int row : order) {
        for (int col = 0; col < 3; ++col) {
            rotation.push_back(g.rotation(row, col));
        }
    }
    doc["rotation"] = rotation;
    return doc;
}

EllipsoidModel model_from_json(const nlohmann::json& doc) {
    try {
        const auto q = doc.at("q").get<std::vector<double>>();
        if (q.size() != 10) {
            throw Error(ErrorCode::ParseError, "model field 'q' must hold 10 numbers");
        }
        return EllipsoidModel(QuadricCoefficients(Eigen::Map<const Vector10>(q.data())));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed model JSON: ") + e.what());
    }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, "'" + path.string() + "': " + e.what());
    }
}

void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    }
    out << doc.dump(2) << '\n';
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
    }
}

void save_model(const EllipsoidModel& m, const std::filesystem::path& path) { write_json_file(model_to_json(m), path); }

EllipsoidModel load_model(const std::filesystem::path& path) {
    const auto doc = read_json_file(path);
    // Accept either a bare model or a fit report carrying one under "model".
    return model_from_json(doc.contains("model") ? doc.at("model") : doc);
}

}  // namespace ellfit
