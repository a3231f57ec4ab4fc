#ifndef TREESOS_REPORT_HPP
#define TREESOS_REPORT_HPP

#include <string>
#include <vector>

#include "treesos/rational.hpp"

namespace treesos {

inline constexpr int kSchemaVersion = 1;

/// One evaluated inequality of a pipeline proof, kept as exact rationals so
/// reports can show the margin.
struct StageCheck {
    std::string name;
    Rat lhs;
    std::string relation;  // "<=", "<", ">=", ">", "=="
    Rat rhs;
    bool ok = false;
};

/// Ordered list of stage checks a run evaluated; emitted with
/// --emit-certificate and embedded in run reports.
struct CertificateChain {
    std::vector<StageCheck> checks;

    StageCheck& require(const std::string& name, const Rat& lhs, const std::string& rel,
                        const Rat& rhs);
    bool all_ok() const;
    std::string failing() const;  // names of failed checks, comma separated
    std::string to_json() const;
};

/// Evaluates lhs REL rhs, records it, and returns whether it holds.
bool stage(CertificateChain& chain, const std::string& name, const Rat& lhs,
           const std::string& rel, const Rat& rhs);

}  // namespace treesos

#endif
