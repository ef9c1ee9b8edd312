#ifndef QSPEC_QFI_HPP
#define QSPEC_QFI_HPP

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "qspec/emitter.hpp"
#include "qspec/optimizer.hpp"
#include "qspec/pulse.hpp"

namespace qspec
{
inline constexpr std::size_t kDefaultGridBudget = 20000;

// Pure-state QFI of the scattered photon: 4 Var(X) under |xi_in|^2.
double qfi_pulse(const EmitterModel &model, const SampledField &in, ParameterTag theta);

struct OracleEstimate
{
    double qfi = 0.0;           // step delta
    double qfi_half_step = 0.0; // step delta/2
    bool step_warning = false;  // the two disagree by more than 1%
};

// 8 (1 - |<out(theta)|out(theta + delta)>|) / delta^2 from two scattered
// fields. `step` <= 0 selects 1e-4 Gamma.
OracleEstimate qfi_fidelity_oracle(const EmitterModel &model, const SampledField &in, ParameterTag theta,
                                   double step = 0.0);

struct QfiBound
{
    double bound = 0.0; // (mu_max - mu_min)^2
    double mu_max = 0.0;
    double mu_min = 0.0;
    double omega_max = 0.0;
    double omega_min = 0.0;
    bool min_at_infinity = false;
    Extrema extrema;
};

QfiBound qfi_bound(const EmitterModel &model, ParameterTag theta);

struct QfiResult
{
    double value = 0.0;
    double bound = 0.0;
    double mu_max = 0.0;
    double mu_min = 0.0;
    double omega_max = 0.0;
    double omega_min = 0.0;
    double saturation = 0.0;
};

QfiResult evaluate_qfi(const EmitterModel &model, const SampledField &in, ParameterTag theta);

// Stand-in for the infinitely detuned mode: max(eps) + 10^3 max(Gamma, spread).
double far_frequency(const EmitterModel &model);

PulseSpec optimal_pulse(const EmitterModel &model, ParameterTag theta, double kappa, Regularization reg);
PulseSpec optimal_pulse(const EmitterModel &model, const QfiBound &bound, ParameterTag theta, double kappa,
                        Regularization reg);

struct KappaRow
{
    Regularization reg;
    double kappa_over_gamma;
    double qfi_gamma2;
};

// Row order: regularizations in the given order, kappas in the given order.
std::vector<KappaRow> sweep_kappa(const EmitterModel &model, ParameterTag theta, const std::vector<Regularization> &regs,
                                  const std::vector<double> &kappas_over_gamma,
                                  std::size_t budget = kDefaultGridBudget);

// 30 log-spaced values from 10^2 down to 10^-3.
std::vector<double> default_kappas();

enum class PulseFamily
{
    Gaussian,
    Rectangular,
    DecayingExp,
    RisingExp
};

const char *to_string(PulseFamily family);
PulseFamily parse_family(const std::string &text);

// Resonant member of a family with spectral scale `bandwidth`: Gaussian
// standard deviation, exponential half-width, or 1/duration of a temporal box.
PulseSpec family_pulse(PulseFamily family, double center, double bandwidth);

struct BandwidthRow
{
    PulseFamily family;
    double bandwidth_over_gamma;
    double qfi_gamma2;
};

std::vector<BandwidthRow> bandwidth_sweep(const EmitterModel &model, const std::vector<PulseFamily> &families,
                                          const std::vector<double> &bandwidths_over_gamma,
                                          std::size_t budget = kDefaultGridBudget);

std::map<PulseFamily, BandwidthRow> family_maxima(const std::vector<BandwidthRow> &rows);

// 61 log-spaced values from 10^-2 to 10^2.
std::vector<double> default_bandwidths();

} // namespace qspec

#endif // QSPEC_QFI_HPP
