#ifndef QSPEC_EMITTER_HPP
#define QSPEC_EMITTER_HPP

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qspec/error.hpp"

namespace qspec
{
using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Eigenstates whose weight |<gamma|e_k>|^2 falls below this carry no pole.
inline constexpr double kDarkOverlap = 1e-14;
// Half-width of the band around a pole, in units of the emission rate.
inline constexpr double kPoleGuard = 1e-9;

struct SpectralDecomposition
{
    std::vector<double> eigenvalues; // ascending
    std::vector<double> overlaps;    // |<gamma|e_k>|^2, sums to 1
};

// A pole of the susceptibility: a cluster of (numerically) degenerate
// eigenvalues together with the projection of |gamma> onto that eigenspace.
struct Pole
{
    double position = 0.0;
    double weight = 0.0; // <gamma|P|gamma>
    CVector projected;   // P|gamma>
};

// Estimation target: the emission rate or one diagonal entry of H_M.
class ParameterTag
{
public:
    enum class Kind
    {
        Gamma,
        Detuning
    };

    static ParameterTag gamma() { return ParameterTag(Kind::Gamma, 0); }
    // `level` is 1-based, matching the usual |1>..|N> labelling.
    static ParameterTag detuning(int level);
    // Accepts "gamma", "detuning:J" and "delta:J".
    static ParameterTag parse(const std::string &text);

    Kind kind() const { return kind_; }
    bool is_gamma() const { return kind_ == Kind::Gamma; }
    int level() const { return level_; }
    std::string to_string() const;

    friend bool operator==(const ParameterTag &, const ParameterTag &) = default;

private:
    ParameterTag(Kind kind, int level) : kind_(kind), level_(level) {}

    Kind kind_;
    int level_;
};

// Singly-excited-subspace model of the emitter: Hermitian H_M (relative to the
// carrier), normalized coupling vector |gamma> and emission rate Gamma.
// Instances are immutable and validated on construction.
class EmitterModel
{
public:
    static EmitterModel create(CMatrix hamiltonian, CVector coupling, double rate,
                               std::string frequency_unit = {});
    static EmitterModel two_level(double detuning, double rate);

    int dimension() const { return static_cast<int>(hamiltonian_.rows()); }
    const CMatrix &hamiltonian() const { return hamiltonian_; }
    const CVector &coupling() const { return coupling_; }
    double rate() const { return rate_; }
    double pole_guard() const { return kPoleGuard * rate_; }
    const std::string &frequency_unit() const { return unit_; }

    const SpectralDecomposition &spectrum() const { return spectrum_; }
    const CMatrix &eigenvectors() const { return eigenvectors_; }
    // Bright poles, ascending. Dark eigenvalues are not listed.
    const std::vector<Pole> &poles() const { return poles_; }

    // Eigenvalue range including dark states.
    double min_eigenvalue() const { return spectrum_.eigenvalues.front(); }
    double max_eigenvalue() const { return spectrum_.eigenvalues.back(); }

    EmitterModel with_rate(double rate) const;
    EmitterModel with_detuning_shift(int level, double shift) const;

    // Index into poles() of a pole within the guard band of omega, if any.
    std::optional<std::size_t> pole_near(double omega) const;

private:
    EmitterModel() = default;
    void decompose();

    CMatrix hamiltonian_;
    CVector coupling_;
    double rate_ = 1.0;
    std::string unit_;
    SpectralDecomposition spectrum_;
    CMatrix eigenvectors_;
    std::vector<Pole> poles_;
};

EmitterModel emitter_from_json(const nlohmann::json &doc);
nlohmann::json emitter_to_json(const EmitterModel &model);

// chi(omega) = (Gamma/2) <gamma|(omega - H_M)^-1|gamma>, via a linear solve.
// Throws Errc::PoleProximity inside the guard band of a pole.
double susceptibility(const EmitterModel &model, double omega);
// <gamma|(omega - H_M)^-1|gamma> scaled by Gamma/2 before discarding the
// (roundoff-level) imaginary part.
cdouble susceptibility_complex(const EmitterModel &model, double omega);

// Partial-fraction form of the same quantity.
double susceptibility_spectral(const SpectralDecomposition &decomp, double rate, double omega);

// d chi / d theta. Gamma: chi / Gamma. Detuning(j): (Gamma/2)|<j|x>|^2 with
// (omega - H_M) x = |gamma>.
double d_susceptibility(const EmitterModel &model, double omega, ParameterTag theta);

// X(omega) = 2 d_theta chi / (1 + chi^2). Total on the real line: inside a
// pole's guard band the analytic limit is returned.
double response(const EmitterModel &model, double omega, ParameterTag theta);

// dX/domega away from poles (throws PoleProximity inside a guard band).
double response_slope(const EmitterModel &model, double omega, ParameterTag theta);

// Time-domain scattering kernel Gamma Theta(t) <gamma|exp(-(i H_M + Gamma|gamma><gamma|/2) t)|gamma>.
// Theta(0) = 1.
cdouble kernel_time(const EmitterModel &model, double t);

// kernel_time at t = 0, dt, 2 dt, ... computed by repeated application of the
// one-step propagator.
std::vector<cdouble> kernel_time_series(const EmitterModel &model, double dt, std::size_t count);

// 2 i chi / (1 + i chi); equals 2 at a pole.
cdouble kernel_freq(const EmitterModel &model, double omega);

void validate(const EmitterModel &model, ParameterTag theta);

} // namespace qspec

#endif // QSPEC_EMITTER_HPP
