#ifndef QSPEC_OPTIMIZER_HPP
#define QSPEC_OPTIMIZER_HPP

#include <vector>

#include <json.hpp>

#include "qspec/emitter.hpp"

namespace qspec
{
// Open interval between consecutive poles (or a pole and the window edge),
// already shrunk by the pole guard.
struct Interval
{
    double lo = 0.0;
    double hi = 0.0;
    bool lo_is_pole = false;
    bool hi_is_pole = false;
};

struct BracketSet
{
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::vector<double> poles;
    std::vector<Interval> intervals;
};

// Window is +-(max|eps| + margin * Gamma); margin defaults to 10^3.
BracketSet make_brackets(const EmitterModel &model, double margin = 1e3);

// All solutions of chi(omega) = c: one per gap between poles and one in the
// outer interval whose asymptote has the sign of c. Ascending.
std::vector<double> solve_chi_equals(const EmitterModel &model, double c);

struct ExtremaCandidate
{
    double omega = 0.0;
    double value = 0.0;
    bool is_max = false;
};

struct Extrema
{
    double mu_max = 0.0;
    double omega_max = 0.0;
    double mu_min = 0.0;
    double omega_min = 0.0;
    // Detuning responses reach their infimum 0 only as |omega| -> infinity.
    bool min_at_infinity = false;
    double tail_envelope = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::vector<ExtremaCandidate> candidates;
};

// Global extrema of response(., theta) over the bracketed window, certified
// against an analytic bound on |X| outside it. Ties go to the smallest omega.
Extrema find_extrema(const EmitterModel &model, ParameterTag theta, const BracketSet &brackets);
Extrema find_extrema(const EmitterModel &model, ParameterTag theta);

nlohmann::json to_json(const BracketSet &brackets);
nlohmann::json to_json(const Extrema &extrema);

} // namespace qspec

#endif // QSPEC_OPTIMIZER_HPP
