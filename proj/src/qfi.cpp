#include "qspec/qfi.hpp"

#include <algorithm>
#include <cmath>

#include "qspec/parallel.hpp"
#include "qspec/scattering.hpp"

namespace qspec
{
namespace
{
std::vector<double> log_space(double from, double to, int count)
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    const double a = std::log10(from), b = std::log10(to);
    for (int k = 0; k < count; ++k)
        out.push_back(std::pow(10.0, a + (b - a) * k / (count - 1)));
    return out;
}

EmitterModel shifted(const EmitterModel &model, ParameterTag theta, double delta)
{
    if (theta.is_gamma())
        return model.with_rate(model.rate() + delta);
    return model.with_detuning_shift(theta.level(), delta);
}

// 1 - |<a|b>| for unit-norm fields on the same grid, without forming 1 - F
// by subtraction: with r_k = w_k conj(a_k) b_k = p_k e^{i phi_k},
// 1 - F^2 = 2A - A^2 - S^2 where A = sum p (1 - cos phi), S = sum p sin phi.
double infidelity(const SampledField &a, const SampledField &b)
{
    double mass = 0.0, A = 0.0, S = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
    {
        const cdouble r = a.weights[k] * std::conj(a.amps[k]) * b.amps[k];
        const double p = std::abs(r);
        if (p == 0.0)
            continue;
        const double phi = std::arg(r);
        const double s = std::sin(0.5 * phi);
        mass += p;
        A += 2.0 * p * s * s;
        S += p * std::sin(phi);
    }
    A /= mass;
    S /= mass;
    const double one_minus_f2 = 2.0 * A - A * A - S * S;
    const double f = std::sqrt(std::max(0.0, 1.0 - one_minus_f2));
    return one_minus_f2 / (1.0 + f);
}

double oracle_at(const EmitterModel &model, const SampledField &in, const SampledField &out0, ParameterTag theta,
                 double step)
{
    const ScatterResult out1 = scatter_freq(shifted(model, theta, step), in);
    return 8.0 * infidelity(out0, out1.out) / (step * step);
}

} // namespace

double qfi_pulse(const EmitterModel &model, const SampledField &in, ParameterTag theta)
{
    validate(model, theta);
    std::vector<double> x(in.size()), p(in.size());
    double mass = 0.0, mean = 0.0;
    for (std::size_t k = 0; k < in.size(); ++k)
    {
        p[k] = in.weights[k] * std::norm(in.amps[k]);
        if (p[k] == 0.0)
            continue;
        x[k] = response(model, in.freqs[k], theta);
        mass += p[k];
        mean += p[k] * x[k];
    }
    if (!(mass > 0.0))
        throw Error(Errc::ZeroField, "nonzero_norm", "QFI of a field with zero norm");
    mean /= mass;
    double var = 0.0;
    for (std::size_t k = 0; k < in.size(); ++k)
        if (p[k] != 0.0)
            var += p[k] * (x[k] - mean) * (x[k] - mean);
    return 4.0 * var / mass;
}

OracleEstimate qfi_fidelity_oracle(const EmitterModel &model, const SampledField &in, ParameterTag theta, double step)
{
    validate(model, theta);
    if (step <= 0.0)
        step = 1e-4 * model.rate();
    const ScatterResult out0 = scatter_freq(model, in);
    OracleEstimate est;
    est.qfi = oracle_at(model, in, out0.out, theta, step);
    est.qfi_half_step = oracle_at(model, in, out0.out, theta, 0.5 * step);
    const double scale = std::max(std::abs(est.qfi), 1e-12 / (model.rate() * model.rate()));
    est.step_warning = std::abs(est.qfi - est.qfi_half_step) > 0.01 * scale;
    return est;
}

QfiBound qfi_bound(const EmitterModel &model, ParameterTag theta)
{
    QfiBound out;
    out.extrema = find_extrema(model, theta);
    out.mu_max = out.extrema.mu_max;
    out.mu_min = out.extrema.mu_min;
    out.omega_max = out.extrema.omega_max;
    out.omega_min = out.extrema.min_at_infinity ? far_frequency(model) : out.extrema.omega_min;
    out.min_at_infinity = out.extrema.min_at_infinity;
    const double range = out.mu_max - out.mu_min;
    out.bound = range * range;
    return out;
}

QfiResult evaluate_qfi(const EmitterModel &model, const SampledField &in, ParameterTag theta)
{
    const QfiBound b = qfi_bound(model, theta);
    QfiResult r;
    r.value = qfi_pulse(model, in, theta);
    r.bound = b.bound;
    r.mu_max = b.mu_max;
    r.mu_min = b.mu_min;
    r.omega_max = b.omega_max;
    r.omega_min = b.omega_min;
    r.saturation = b.bound > 0.0 ? std::clamp(r.value / b.bound, 0.0, 1.0) : 0.0;
    return r;
}

double far_frequency(const EmitterModel &model)
{
    const double spread = model.max_eigenvalue() - model.min_eigenvalue();
    return model.max_eigenvalue() + 1e3 * std::max(model.rate(), spread);
}

PulseSpec optimal_pulse(const EmitterModel &model, const QfiBound &bound, ParameterTag theta, double kappa,
                        Regularization reg)
{
    const double lower = theta.is_gamma() ? bound.omega_min : far_frequency(model);
    PulseSpec spec = DeltaPair{bound.omega_max, lower, kappa, reg, 0.0};
    validate(spec);
    return spec;
}

PulseSpec optimal_pulse(const EmitterModel &model, ParameterTag theta, double kappa, Regularization reg)
{
    return optimal_pulse(model, qfi_bound(model, theta), theta, kappa, reg);
}

std::vector<KappaRow> sweep_kappa(const EmitterModel &model, ParameterTag theta, const std::vector<Regularization> &regs,
                                  const std::vector<double> &kappas_over_gamma, std::size_t budget)
{
    for (double k : kappas_over_gamma)
        if (!(k > 0.0) || !std::isfinite(k))
            throw Error(Errc::InvalidParameter, "kappa_positive", "kappa values must be positive");
    const QfiBound bound = qfi_bound(model, theta);
    const double rate = model.rate();
    std::vector<KappaRow> rows(regs.size() * kappas_over_gamma.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        const Regularization reg = regs[i / kappas_over_gamma.size()];
        const double kappa = kappas_over_gamma[i % kappas_over_gamma.size()];
        const PulseSpec pulse = optimal_pulse(model, bound, theta, kappa * rate, reg);
        const SampledField grid = build_grid(model, pulse, budget);
        rows[i] = {reg, kappa, rate * rate * qfi_pulse(model, grid, theta)};
    });
    return rows;
}

std::vector<double> default_kappas()
{
    return log_space(1e2, 1e-3, 30);
}

const char *to_string(PulseFamily family)
{
    switch (family)
    {
    case PulseFamily::Gaussian: return "gaussian";
    case PulseFamily::Rectangular: return "rectangular";
    case PulseFamily::DecayingExp: return "decaying_exp";
    case PulseFamily::RisingExp: return "rising_exp";
    }
    return "unknown";
}

PulseFamily parse_family(const std::string &text)
{
    for (PulseFamily f : {PulseFamily::Gaussian, PulseFamily::Rectangular, PulseFamily::DecayingExp, PulseFamily::RisingExp})
        if (text == to_string(f))
            return f;
    throw Error(Errc::Config, "family", "unknown pulse family '" + text + "'");
}

PulseSpec family_pulse(PulseFamily family, double center, double bandwidth)
{
    switch (family)
    {
    case PulseFamily::Gaussian: return GaussianPulse{center, bandwidth};
    case PulseFamily::Rectangular: return TemporalBox{center, 1.0 / bandwidth};
    case PulseFamily::DecayingExp: return DecayingExp{center, bandwidth};
    case PulseFamily::RisingExp: return RisingExp{center, bandwidth};
    }
    throw Error(Errc::InvalidPulse, "family", "unknown pulse family");
}

std::vector<BandwidthRow> bandwidth_sweep(const EmitterModel &model, const std::vector<PulseFamily> &families,
                                          const std::vector<double> &bandwidths_over_gamma, std::size_t budget)
{
    for (double b : bandwidths_over_gamma)
        if (!(b > 0.0) || !std::isfinite(b))
            throw Error(Errc::InvalidParameter, "bandwidth_positive", "bandwidth values must be positive");
    const double rate = model.rate();
    // Resonant with the bright line: <gamma|H_M|gamma> (= Delta for a two-level emitter).
    const double center = model.coupling().dot(model.hamiltonian() * model.coupling()).real();
    const ParameterTag theta = ParameterTag::gamma();
    std::vector<BandwidthRow> rows(families.size() * bandwidths_over_gamma.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        const PulseFamily family = families[i / bandwidths_over_gamma.size()];
        const double bw = bandwidths_over_gamma[i % bandwidths_over_gamma.size()];
        const PulseSpec pulse = family_pulse(family, center, bw * rate);
        const SampledField grid = build_grid(model, pulse, budget);
        rows[i] = {family, bw, rate * rate * qfi_pulse(model, grid, theta)};
    });
    return rows;
}

std::map<PulseFamily, BandwidthRow> family_maxima(const std::vector<BandwidthRow> &rows)
{
    std::map<PulseFamily, BandwidthRow> best;
    for (const BandwidthRow &r : rows)
    {
        auto it = best.find(r.family);
        if (it == best.end() || r.qfi_gamma2 > it->second.qfi_gamma2)
            best.insert_or_assign(r.family, r);
    }
    return best;
}

std::vector<double> default_bandwidths()
{
    return log_space(1e-2, 1e2, 61);
}

} // namespace qspec
