#include "mjsmc/model.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mjsmc {

namespace {
constexpr double kRateTol = 1e-10;
constexpr double kRankTol = 1e-10;

std::string at(const std::string& what, int i) { return what + " " + std::to_string(i + 1); }
}  // namespace

double DelaySpec::h1() const {
    return *std::min_element(h1i.begin(), h1i.end());
}

double DelaySpec::h2() const {
    return *std::max_element(h2i.begin(), h2i.end());
}

ValidationReport validate_system(const MjlsSystem& system) {
    ValidationReport rep;
    auto flag = [&](const std::string& msg) { rep.violations.push_back(msg); };

    const int N = system.mode_count();
    if (N < 1) {
        flag("system has no modes");
        return rep;
    }
    for (int i = 0; i < N; ++i) {
        const ModeData& md = system.modes[i];
        if (md.A.rows() != system.n || md.A.cols() != system.n ||
            md.Ad.rows() != system.n || md.Ad.cols() != system.n ||
            md.B.rows() != system.n || md.B.cols() != system.m)
            flag(at("mode", i) + ": matrix dimensions do not match n=" +
                 std::to_string(system.n) + ", m=" + std::to_string(system.m));
        if (!md.A.allFinite() || !md.Ad.allFinite() || !md.B.allFinite())
            flag(at("mode", i) + ": non-finite entries");
        else if (md.B.cols() > 0 && md.B.rows() >= md.B.cols()) {
            const double smin = md.B.jacobiSvd().singularValues().minCoeff();
            if (smin <= kRankTol) flag(at("mode", i) + ": B has rank < m");
        }
        if (md.f < 0.0) flag(at("mode", i) + ": disturbance bound f is negative");
    }

    const DelaySpec& d = system.delays;
    if (static_cast<int>(d.h1i.size()) != N || static_cast<int>(d.h2i.size()) != N ||
        static_cast<int>(d.mui.size()) != N || static_cast<int>(d.tau.size()) != N) {
        flag("delay specification length does not match mode count");
        return rep;
    }
    for (int i = 0; i < N; ++i) {
        if (d.h1i[i] < 0.0 || d.h1i[i] > d.h2i[i])
            flag(at("delays: mode", i) + ": need 0 <= h1i <= h2i");
        const TauForm& tf = d.tau[i];
        if (tf.a - std::abs(tf.b) < d.h1i[i] - kRateTol ||
            tf.a + std::abs(tf.b) > d.h2i[i] + kRateTol)
            flag(at("delays: mode", i) + ": tau_i(t) range exceeds [h1i, h2i]");
        // Reported only: the delay functions of interest may exceed the stated
        // derivative bound without invalidating the synthesis conditions.
        if (std::abs(tf.b * tf.omega) > d.mui[i] + kRateTol)
            flag(at("delays: mode", i) +
                 ": note: |b*omega| exceeds derivative bound mu (reported, not rejected)");
    }

    const TransitionSpec& tr = system.transitions;
    if (tr.N != N || static_cast<int>(tr.entries.size()) != N) {
        flag("transition mask size does not match mode count");
        return rep;
    }
    for (int i = 0; i < N; ++i) {
        if (static_cast<int>(tr.entries[i].size()) != N) {
            flag(at("transitions.mask row", i) + " has wrong length");
            continue;
        }
        bool fully_known = true;
        double row_sum = 0.0;
        for (int j = 0; j < N; ++j) {
            const auto& e = tr.entries[i][j];
            if (!e.has_value()) {
                fully_known = false;
                continue;
            }
            row_sum += *e;
            if (j != i && *e < 0.0)
                flag(at("transitions.mask row", i) + ": known off-diagonal rate is negative");
            if (j == i && *e > 0.0)
                flag(at("transitions.mask row", i) + ": known diagonal rate is positive");
        }
        if (fully_known && std::abs(row_sum) > kRateTol)
            flag(at("transitions.mask row", i) + ": fully-known row sums to " +
                 std::to_string(row_sum) + " != 0");
    }
    if (tr.true_rates) {
        const Matrix& L = *tr.true_rates;
        if (L.rows() != N || L.cols() != N)
            flag("true_rates has wrong shape");
        else {
            for (int i = 0; i < N; ++i) {
                double row_sum = 0.0;
                for (int j = 0; j < N; ++j) {
                    row_sum += L(i, j);
                    if (j != i && L(i, j) < 0.0)
                        flag(at("true_rates row", i) + ": off-diagonal rate is negative");
                    const auto& e = tr.entries[i][j];
                    if (e.has_value() && std::abs(*e - L(i, j)) > kRateTol)
                        flag(at("true_rates row", i) + ": disagrees with known mask entry " +
                             std::to_string(j + 1));
                }
                if (std::abs(row_sum) > kRateTol)
                    flag(at("true_rates row", i) + " does not sum to 0");
            }
        }
    }
    return rep;
}

KnownIndexSets known_index_sets(const TransitionSpec& transitions, int i) {
    if (i < 0 || i >= transitions.N)
        throw std::out_of_range("known_index_sets: mode index out of range");
    KnownIndexSets sets;
    for (int j = 0; j < transitions.N; ++j) {
        if (transitions.entries[i][j].has_value()) {
            sets.known.push_back(j);
            sets.kappa.push_back(j);
            if (j != i) ++sets.alpha;
        } else {
            sets.unknown.push_back(j);
        }
    }
    return sets;
}

namespace {

Matrix matrix_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw std::invalid_argument(where + ": expected a 2-D array");
    const int r = static_cast<int>(j.size());
    const int c = static_cast<int>(j[0].size());
    Matrix m(r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(j[i].size()) != c)
            throw std::invalid_argument(where + ": ragged rows");
        for (int k = 0; k < c; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

MjlsSystem system_from_json(const nlohmann::json& config) {
    MjlsSystem sys;
    if (!config.contains("dimensions"))
        throw std::invalid_argument("config: missing \"dimensions\"");
    sys.n = config["dimensions"].at("n").get<int>();
    sys.m = config["dimensions"].at("m").get<int>();

    if (!config.contains("modes") || !config["modes"].is_array())
        throw std::invalid_argument("config: missing \"modes\" array");
    for (const auto& jm : config["modes"]) {
        ModeData md;
        md.A = matrix_from_json(jm.at("A"), "modes[].A");
        md.Ad = matrix_from_json(jm.at("Ad"), "modes[].Ad");
        md.B = matrix_from_json(jm.at("B"), "modes[].B");
        md.f = jm.at("f").get<double>();
        sys.modes.push_back(std::move(md));
    }

    const auto& jd = config.at("delays");
    sys.delays.h1i = jd.at("h1i").get<std::vector<double>>();
    sys.delays.h2i = jd.at("h2i").get<std::vector<double>>();
    sys.delays.mui = jd.at("mui").get<std::vector<double>>();
    for (const auto& jt : jd.at("tau")) {
        TauForm tf;
        const std::string form = jt.at("form").get<std::string>();
        if (form == "sin")
            tf.shape = TauForm::Shape::Sin;
        else if (form == "cos")
            tf.shape = TauForm::Shape::Cos;
        else
            throw std::invalid_argument("delays.tau[].form must be \"sin\" or \"cos\"");
        tf.a = jt.at("a").get<double>();
        tf.b = jt.at("b").get<double>();
        tf.omega = jt.at("omega").get<double>();
        sys.delays.tau.push_back(tf);
    }

    const auto& jt = config.at("transitions");
    const auto& mask = jt.at("mask");
    sys.transitions.N = static_cast<int>(mask.size());
    for (const auto& row : mask) {
        std::vector<std::optional<double>> r;
        for (const auto& e : row)
            r.push_back(e.is_null() ? std::nullopt : std::make_optional(e.get<double>()));
        sys.transitions.entries.push_back(std::move(r));
    }
    if (jt.contains("true_rates") && !jt["true_rates"].is_null())
        sys.transitions.true_rates = matrix_from_json(jt["true_rates"], "transitions.true_rates");
    return sys;
}

nlohmann::json system_to_json(const MjlsSystem& system) {
    nlohmann::json j;
    j["dimensions"] = {{"n", system.n}, {"m", system.m}};
    j["modes"] = nlohmann::json::array();
    for (const ModeData& md : system.modes)
        j["modes"].push_back({{"A", matrix_to_json(md.A)},
                              {"Ad", matrix_to_json(md.Ad)},
                              {"B", matrix_to_json(md.B)},
                              {"f", md.f}});
    nlohmann::json tau = nlohmann::json::array();
    for (const TauForm& tf : system.delays.tau)
        tau.push_back({{"form", tf.shape == TauForm::Shape::Sin ? "sin" : "cos"},
                       {"a", tf.a},
                       {"b", tf.b},
                       {"omega", tf.omega}});
    j["delays"] = {{"h1i", system.delays.h1i},
                   {"h2i", system.delays.h2i},
                   {"mui", system.delays.mui},
                   {"tau", tau}};
    nlohmann::json mask = nlohmann::json::array();
    for (const auto& row : system.transitions.entries) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& e : row)
            r.push_back(e.has_value() ? nlohmann::json(*e) : nlohmann::json(nullptr));
        mask.push_back(r);
    }
    j["transitions"] = {{"mask", mask}};
    if (system.transitions.true_rates)
        j["transitions"]["true_rates"] = matrix_to_json(*system.transitions.true_rates);
    return j;
}

}  // namespace mjsmc
