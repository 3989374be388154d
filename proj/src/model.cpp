#include "bmp/model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bmp/errors.hpp"

namespace bmp::model {

using nlohmann::json;

double BmpModel::kill_rate(std::size_t x) const {
    double row_sum = 0.0;
    for (std::size_t y = 0; y < n(); ++y) row_sum += q(x, y);
    return std::max(0.0, -row_sum);
}

std::size_t BmpModel::state_index(const std::string& label) const {
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] == label) return i;
    }
    fail(errkind::kInvariant, "unknown state label '" + label + "'");
}

namespace {

void require_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& item : obj.items()) {
        if (allowed.count(item.key()) == 0) {
            fail(errkind::kParse, "unknown field '" + item.key() + "' in " + where);
        }
    }
    for (const auto& key : allowed) {
        if (!obj.contains(key)) {
            fail(errkind::kParse, "missing field '" + key + "' in " + where);
        }
    }
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(errkind::kParse, where + " must be a number");
    return v.get<double>();
}

}  // namespace

BmpModel parse_model(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(errkind::kParse, std::string("model is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) fail(errkind::kParse, "model root must be an object");
    require_keys(root, {"states", "q", "gamma", "offspring"}, "model");

    BmpModel m;

    const json& states = root["states"];
    if (!states.is_array() || states.empty()) {
        fail(errkind::kParse, "'states' must be a nonempty array of labels");
    }
    for (const auto& s : states) {
        if (!s.is_string()) fail(errkind::kParse, "'states' entries must be strings");
        m.states.push_back(s.get<std::string>());
    }
    const std::size_t n = m.states.size();
    if (n > kMaxStates) {
        fail(errkind::kCapExceeded,
             "model has " + std::to_string(n) + " states; cap is " + std::to_string(kMaxStates));
    }
    {
        std::set<std::string> seen(m.states.begin(), m.states.end());
        if (seen.size() != n) fail(errkind::kParse, "state labels must be distinct");
    }

    const json& q = root["q"];
    if (!q.is_array() || q.size() != n) fail(errkind::kParse, "'q' must be an n x n matrix");
    m.q = linalg::Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const json& row = q[i];
        if (!row.is_array() || row.size() != n) fail(errkind::kParse, "'q' must be an n x n matrix");
        double row_sum = 0.0;
        double row_scale = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = as_number(row[j], "q[" + std::to_string(i) + "][" + std::to_string(j) + "]");
            if (i != j && v < 0.0) {
                fail(errkind::kInvariant, "q[" + std::to_string(i) + "][" + std::to_string(j) +
                                              "] is negative off the diagonal");
            }
            if (i == j && v > 0.0) {
                fail(errkind::kInvariant, "q[" + std::to_string(i) + "][" + std::to_string(i) +
                                              "] must be <= 0");
            }
            m.q(i, j) = v;
            row_sum += v;
            row_scale = std::max(row_scale, std::fabs(v));
        }
        if (row_sum > 1e-12 * row_scale) {
            fail(errkind::kInvariant,
                 "row " + std::to_string(i) + " of q has positive sum (mass creation)");
        }
    }

    const json& gamma = root["gamma"];
    if (!gamma.is_array() || gamma.size() != n) fail(errkind::kParse, "'gamma' must have n entries");
    m.gamma.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = as_number(gamma[i], "gamma[" + std::to_string(i) + "]");
        if (v < 0.0) fail(errkind::kInvariant, "gamma[" + std::to_string(i) + "] is negative");
        m.gamma[i] = v;
    }

    const json& offspring = root["offspring"];
    if (!offspring.is_array() || offspring.size() != n) {
        fail(errkind::kParse, "'offspring' must have one law per state");
    }
    m.offspring.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const json& law = offspring[i];
        if (!law.is_array() || law.empty()) {
            fail(errkind::kParse, "offspring law for state '" + m.states[i] + "' must be a nonempty array");
        }
        double p_sum = 0.0;
        for (const auto& cfg_json : law) {
            if (!cfg_json.is_object()) fail(errkind::kParse, "offspring configs must be objects");
            require_keys(cfg_json, {"p", "children"},
                         "offspring config of state '" + m.states[i] + "'");
            OffspringConfig cfg;
            cfg.p = as_number(cfg_json["p"], "offspring p of state '" + m.states[i] + "'");
            if (cfg.p < 0.0) {
                fail(errkind::kInvariant, "offspring probability at state '" + m.states[i] + "' is negative");
            }
            const json& children = cfg_json["children"];
            if (!children.is_array()) fail(errkind::kParse, "'children' must be an array of state indices");
            if (children.size() > kMaxLitter) {
                fail(errkind::kCapExceeded, "litter of size " + std::to_string(children.size()) +
                                                " at state '" + m.states[i] + "'; cap is " +
                                                std::to_string(kMaxLitter));
            }
            for (const auto& c : children) {
                if (!c.is_number_unsigned()) {
                    fail(errkind::kParse, "'children' entries must be nonnegative state indices");
                }
                const auto idx = c.get<std::uint64_t>();
                if (idx >= n) {
                    fail(errkind::kParse, "child state index " + std::to_string(idx) + " out of range");
                }
                cfg.children.push_back(static_cast<std::uint32_t>(idx));
            }
            p_sum += cfg.p;
            m.offspring[i].push_back(std::move(cfg));
        }
        if (std::fabs(p_sum - 1.0) > 1e-12) {
            std::ostringstream os;
            os << "offspring probabilities at state '" << m.states[i] << "' sum to " << p_sum;
            fail(errkind::kInvariant, os.str());
        }
        for (auto& cfg : m.offspring[i]) cfg.p /= p_sum;
    }

    return m;
}

BmpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errkind::kIo, "cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

linalg::Matrix mean_offspring_matrix(const BmpModel& m) {
    const std::size_t n = m.n();
    linalg::Matrix mm(n, n);
    for (std::size_t x = 0; x < n; ++x) {
        for (const auto& cfg : m.offspring[x]) {
            for (std::uint32_t child : cfg.children) mm(x, child) += cfg.p;
        }
    }
    return mm;
}

linalg::Matrix mean_generator(const BmpModel& m) {
    const std::size_t n = m.n();
    linalg::Matrix a = m.q;
    const linalg::Matrix mm = mean_offspring_matrix(m);
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
            a(x, y) += m.gamma[x] * (mm(x, y) - (x == y ? 1.0 : 0.0));
        }
    }
    return a;
}

double check_h2_geometric(const BmpModel& m) {
    double sup = 0.0;
    for (std::size_t x = 0; x < m.n(); ++x) {
        sup = std::max(sup, expect_over_configs(m, x, [](const std::vector<std::uint32_t>& kids) {
                           return std::ldexp(1.0, static_cast<int>(kids.size()));
                       }));
    }
    return sup;
}

double check_h2k(const BmpModel& m, int k) {
    if (k < 1) fail(errkind::kInvariant, "litter moment order must be >= 1");
    double sup = 0.0;
    for (std::size_t x = 0; x < m.n(); ++x) {
        sup = std::max(sup, expect_over_configs(m, x, [k](const std::vector<std::uint32_t>& kids) {
                           return std::pow(static_cast<double>(kids.size()), k);
                       }));
    }
    return sup;
}

double expect_over_configs(const BmpModel& m, std::size_t x,
                           const std::function<double(const std::vector<std::uint32_t>&)>& h) {
    double acc = 0.0;
    for (const auto& cfg : m.offspring[x]) acc += cfg.p * h(cfg.children);
    return acc;
}

}  // namespace bmp::model
