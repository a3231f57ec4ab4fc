#include "treesos/concentration.hpp"

namespace treesos {

WeightedFunction WeightedFunction::uniform(std::vector<Rat> vals) {
    WeightedFunction wf;
    int n = int(vals.size());
    wf.values = std::move(vals);
    wf.measure.assign(n, Rat(1, n));
    wf.validate();
    return wf;
}

WeightedFunction WeightedFunction::weighted(std::vector<Rat> vals, std::vector<Rat> mu) {
    WeightedFunction wf;
    wf.values = std::move(vals);
    wf.measure = std::move(mu);
    wf.validate();
    return wf;
}

Rat WeightedFunction::sup_norm() const {
    Rat m = 0;
    for (const auto& v : values)
        if (v > m) m = v;
    return m;
}

Rat WeightedFunction::expectation() const {
    Rat e = 0;
    for (std::size_t i = 0; i < values.size(); ++i) e += values[i] * measure[i];
    return e;
}

void WeightedFunction::validate() const {
    if (values.empty() || values.size() != measure.size())
        throw std::invalid_argument("WeightedFunction: shape mismatch");
    Rat total = 0;
    for (const auto& m : measure) {
        if (m < 0) throw std::invalid_argument("WeightedFunction: negative measure");
        total += m;
    }
    if (total != 1) throw std::invalid_argument("WeightedFunction: measure does not sum to 1");
    for (const auto& v : values)
        if (v < 0) throw std::invalid_argument("WeightedFunction: negative value");
}

DichotomyCase concentration_dichotomy(const WeightedFunction& wf, const Rat& t, const Rat& eps) {
    wf.validate();
    if (!(eps > 0 && eps < 1))
        throw PreconditionError("concentration_dichotomy: 0 < eps < 1 required");
    const Rat r = sqrt_upper(eps);   // >= sqrt(eps)
    const Rat s = sqrt_upper(r);     // >= eps^(1/4)
    if (!(r * wf.sup_norm() < t && t <= wf.expectation()))
        throw PreconditionError("concentration_dichotomy: sqrt(eps)||f|| < t <= E(f) required");

    Rat mass_i = 0, mass_ii = 0;
    const Rat thr_i = (Rat(1) + r) * t;
    const Rat thr_ii = (Rat(1) - s) * t;
    for (int n = 0; n < wf.size(); ++n) {
        if (wf.values[n] > thr_i) mass_i += wf.measure[n];
        if (wf.values[n] > thr_ii) mass_ii += wf.measure[n];
    }
    bool case_i = mass_i >= eps;
    bool case_ii = mass_ii >= Rat(1) - s;
    if (case_i && case_ii) return DichotomyCase::Both;
    if (case_i) return DichotomyCase::CaseI;
    if (case_ii) return DichotomyCase::CaseII;
    throw ContractViolation("concentration_dichotomy: neither case holds");
}

VertexSet concentration_bound(const std::vector<Rat>& f, const Rat& t, const Rat& eps) {
    const int n = int(f.size());
    if (n == 0) throw std::invalid_argument("concentration_bound: empty function");
    if (!(eps > 0 && eps < Rat(1, 2)))
        throw PreconditionError("concentration_bound: 0 < eps < 1/2 required");
    if (!(t > 0)) throw PreconditionError("concentration_bound: t > 0 required");
    Rat mean = 0, sup = 0;
    for (const auto& v : f) {
        if (v < 0) throw std::invalid_argument("concentration_bound: negative value");
        mean += v;
        if (v > sup) sup = v;
    }
    mean /= n;
    if (!(t <= mean)) throw PreconditionError("concentration_bound: t <= mean(f) required");
    if (!(sup <= (Rat(1) + eps) * t))
        throw PreconditionError("concentration_bound: ||f|| <= (1+eps)t required");

    const Rat r = sqrt_upper(eps);
    const Rat thr = (Rat(1) - r) * t;
    VertexSet out(n);
    for (int i = 0; i < n; ++i)
        if (f[i] >= thr) out.set(i);
    if (Rat(out.count()) < (Rat(1) - r) * n)
        throw ContractViolation("concentration_bound: conclusion set too small");
    return out;
}

}  // namespace treesos
