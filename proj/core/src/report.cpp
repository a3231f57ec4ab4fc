#include "treesos/report.hpp"

#include <json.hpp>

namespace treesos {

StageCheck& CertificateChain::require(const std::string& name, const Rat& lhs,
                                      const std::string& rel, const Rat& rhs) {
    StageCheck c;
    c.name = name;
    c.lhs = lhs;
    c.relation = rel;
    c.rhs = rhs;
    if (rel == "<=") c.ok = lhs <= rhs;
    else if (rel == "<") c.ok = lhs < rhs;
    else if (rel == ">=") c.ok = lhs >= rhs;
    else if (rel == ">") c.ok = lhs > rhs;
    else if (rel == "==") c.ok = lhs == rhs;
    else throw std::invalid_argument("StageCheck: unknown relation " + rel);
    checks.push_back(std::move(c));
    return checks.back();
}

bool CertificateChain::all_ok() const {
    for (const auto& c : checks)
        if (!c.ok) return false;
    return true;
}

std::string CertificateChain::failing() const {
    std::string out;
    for (const auto& c : checks) {
        if (c.ok) continue;
        if (!out.empty()) out += ", ";
        out += c.name;
    }
    return out;
}

std::string CertificateChain::to_json() const {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json e;
        e["name"] = c.name;
        e["lhs"] = rat_str(c.lhs);
        e["relation"] = c.relation;
        e["rhs"] = rat_str(c.rhs);
        e["ok"] = c.ok;
        j["checks"].push_back(e);
    }
    return j.dump(2);
}

bool stage(CertificateChain& chain, const std::string& name, const Rat& lhs,
           const std::string& rel, const Rat& rhs) {
    return chain.require(name, lhs, rel, rhs).ok;
}

}  // namespace treesos
