#include "qspec/emitter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace qspec
{
namespace
{
constexpr double kHermitianTol = 1e-12;
constexpr double kNormTol = 1e-12;
// Eigenvalues closer than this (relative to the model scale) form one pole.
constexpr double kClusterTol = 1e-10;
// Closer than this to any eigenvalue the resolvent is assembled from the
// eigenbasis instead of a near-singular LU solve.
constexpr double kSpectralBand = 1e-6;

[[noreturn]] void invalid(const std::string &invariant, const std::string &detail)
{
    throw Error(Errc::InvalidModel, invariant, "emitter model violates " + invariant + ": " + detail);
}

// (omega - H_M)^-1 |v>, for non-pole omega.
CVector resolve(const EmitterModel &model, double omega, const CVector &rhs, bool drop_dark)
{
    const auto &eig = model.spectrum().eigenvalues;
    const double band = kSpectralBand * model.rate();
    const bool near_eigenvalue = std::any_of(eig.begin(), eig.end(), [&](double e) { return std::abs(omega - e) < band; });
    if (!near_eigenvalue)
    {
        CMatrix shifted = -model.hamiltonian();
        shifted.diagonal().array() += omega;
        return shifted.partialPivLu().solve(rhs);
    }
    const CMatrix &vecs = model.eigenvectors();
    CVector coeff = vecs.adjoint() * rhs;
    for (int k = 0; k < coeff.size(); ++k)
    {
        const double gap = omega - eig[static_cast<std::size_t>(k)];
        if (drop_dark && std::norm(coeff(k)) < kDarkOverlap)
            coeff(k) = 0.0;
        else
            coeff(k) /= gap;
    }
    return vecs * coeff;
}

struct Resolvent
{
    double chi;
    CVector x;
};

Resolvent resolvent(const EmitterModel &model, double omega)
{
    CVector x = resolve(model, omega, model.coupling(), true);
    const double chi = 0.5 * model.rate() * model.coupling().dot(x).real();
    return {chi, std::move(x)};
}

void require_off_pole(const EmitterModel &model, double omega)
{
    if (auto k = model.pole_near(omega))
    {
        std::ostringstream msg;
        msg << "omega = " << omega << " lies within " << model.pole_guard() << " of the pole at "
            << model.poles()[*k].position;
        throw Error(Errc::PoleProximity, "pole_guard", msg.str());
    }
}

} // namespace

ParameterTag ParameterTag::detuning(int level)
{
    if (level < 1)
        throw Error(Errc::InvalidParameter, "level>=1", "detuning level must be 1-based, got " + std::to_string(level));
    return ParameterTag(Kind::Detuning, level);
}

ParameterTag ParameterTag::parse(const std::string &text)
{
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "gamma")
        return gamma();
    for (const std::string prefix : {"detuning:", "delta:", "detuning(", "delta("})
    {
        if (lower.rfind(prefix, 0) == 0)
        {
            std::string rest = lower.substr(prefix.size());
            if (!rest.empty() && rest.back() == ')')
                rest.pop_back();
            try
            {
                std::size_t used = 0;
                const int level = std::stoi(rest, &used);
                if (used == rest.size())
                    return detuning(level);
            }
            catch (const std::logic_error &)
            {
            }
        }
    }
    throw Error(Errc::InvalidParameter, "parameter", "unrecognised parameter '" + text + "' (expected gamma or detuning:J)");
}

std::string ParameterTag::to_string() const
{
    return is_gamma() ? std::string("Gamma") : "Detuning(" + std::to_string(level_) + ")";
}

EmitterModel EmitterModel::create(CMatrix hamiltonian, CVector coupling, double rate, std::string frequency_unit)
{
    if (hamiltonian.rows() < 1 || hamiltonian.rows() != hamiltonian.cols())
        invalid("h_m_square", "H_M must be a non-empty square matrix");
    if (coupling.size() != hamiltonian.rows())
        invalid("gamma_vec_dimension", "coupling vector length differs from dimension of H_M");
    if (!hamiltonian.allFinite() || !coupling.allFinite())
        invalid("finite_entries", "non-finite entry in H_M or gamma_vec");
    if (!(rate > 0.0) || !std::isfinite(rate))
        invalid("gamma_rate_positive", "gamma_rate must be a finite positive number");

    const double scale = std::max(1.0, hamiltonian.cwiseAbs().maxCoeff());
    const double asym = (hamiltonian - hamiltonian.adjoint()).cwiseAbs().maxCoeff();
    if (asym > kHermitianTol * scale)
        invalid("h_m_hermitian", "max |H - H^dagger| = " + std::to_string(asym));
    const double norm = coupling.norm();
    if (std::abs(norm - 1.0) > kNormTol)
        invalid("gamma_vec_normalized", "||gamma|| = " + std::to_string(norm));

    EmitterModel model;
    model.hamiltonian_ = 0.5 * (hamiltonian + hamiltonian.adjoint());
    model.coupling_ = coupling / norm;
    model.rate_ = rate;
    model.unit_ = std::move(frequency_unit);
    model.decompose();
    return model;
}

EmitterModel EmitterModel::two_level(double detuning, double rate)
{
    CMatrix h(1, 1);
    h(0, 0) = detuning;
    CVector g(1);
    g(0) = 1.0;
    return create(std::move(h), std::move(g), rate);
}

void EmitterModel::decompose()
{
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hamiltonian_);
    const auto &values = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
    const int n = dimension();

    spectrum_.eigenvalues.assign(values.data(), values.data() + n);
    spectrum_.overlaps.resize(static_cast<std::size_t>(n));
    const CVector coeff = eigenvectors_.adjoint() * coupling_;
    for (int k = 0; k < n; ++k)
        spectrum_.overlaps[static_cast<std::size_t>(k)] = std::norm(coeff(k));

    const double tol = kClusterTol * std::max(rate_, std::max(std::abs(values(0)), std::abs(values(n - 1))));
    poles_.clear();
    int start = 0;
    while (start < n)
    {
        int stop = start + 1;
        while (stop < n && values(stop) - values(stop - 1) <= tol)
            ++stop;
        Pole pole;
        pole.projected = CVector::Zero(n);
        double sum = 0.0;
        for (int k = start; k < stop; ++k)
        {
            pole.projected += eigenvectors_.col(k) * coeff(k);
            sum += values(k);
        }
        pole.position = sum / (stop - start);
        pole.weight = pole.projected.squaredNorm();
        if (pole.weight > kDarkOverlap)
            poles_.push_back(std::move(pole));
        start = stop;
    }
}

EmitterModel EmitterModel::with_rate(double rate) const
{
    return create(hamiltonian_, coupling_, rate, unit_);
}

EmitterModel EmitterModel::with_detuning_shift(int level, double shift) const
{
    if (level < 1 || level > dimension())
        throw Error(Errc::InvalidParameter, "level<=n", "detuning level " + std::to_string(level) + " outside 1.." + std::to_string(dimension()));
    CMatrix h = hamiltonian_;
    h(level - 1, level - 1) += shift;
    return create(std::move(h), coupling_, rate_, unit_);
}

std::optional<std::size_t> EmitterModel::pole_near(double omega) const
{
    const double guard = pole_guard();
    for (std::size_t k = 0; k < poles_.size(); ++k)
        if (std::abs(omega - poles_[k].position) < guard)
            return k;
    return std::nullopt;
}

void validate(const EmitterModel &model, ParameterTag theta)
{
    if (!theta.is_gamma() && theta.level() > model.dimension())
        throw Error(Errc::InvalidParameter, "level<=n",
                    "parameter " + theta.to_string() + " exceeds SES dimension " + std::to_string(model.dimension()));
}

EmitterModel emitter_from_json(const nlohmann::json &doc)
{
    if (!doc.is_object())
        throw Error(Errc::Config, "emitter_object", "emitter block must be a JSON object");
    const auto need = [&](const char *key) -> const nlohmann::json & {
        if (!doc.contains(key))
            throw Error(Errc::Config, key, std::string("emitter block lacks required key '") + key + "'");
        return doc.at(key);
    };
    try
    {
        const int n = need("n").get<int>();
        if (n < 1)
            invalid("n_positive", "n must be >= 1");
        const auto &re = need("h_m_re");
        const nlohmann::json im = doc.value("h_m_im", nlohmann::json());
        const auto &gre = need("gamma_vec_re");
        const nlohmann::json gim = doc.value("gamma_vec_im", nlohmann::json());

        const auto check_rows = [&](const nlohmann::json &m, const char *name) {
            if (!m.is_array() || static_cast<int>(m.size()) != n)
                invalid("n_matches_dimensions", std::string(name) + " must have n rows");
            for (const auto &row : m)
                if (!row.is_array() || static_cast<int>(row.size()) != n)
                    invalid("n_matches_dimensions", std::string(name) + " must have n columns");
        };
        check_rows(re, "h_m_re");
        if (!im.is_null())
            check_rows(im, "h_m_im");
        if (!gre.is_array() || static_cast<int>(gre.size()) != n)
            invalid("n_matches_dimensions", "gamma_vec_re must have n entries");
        if (!gim.is_null() && (!gim.is_array() || static_cast<int>(gim.size()) != n))
            invalid("n_matches_dimensions", "gamma_vec_im must have n entries");

        CMatrix h(n, n);
        CVector g(n);
        for (int r = 0; r < n; ++r)
        {
            for (int c = 0; c < n; ++c)
                h(r, c) = cdouble(re[r][c].get<double>(), im.is_null() ? 0.0 : im[r][c].get<double>());
            g(r) = cdouble(gre[r].get<double>(), gim.is_null() ? 0.0 : gim[r].get<double>());
        }
        return EmitterModel::create(std::move(h), std::move(g), need("gamma_rate").get<double>(),
                                    doc.value("frequency_unit", std::string()));
    }
    catch (const nlohmann::json::exception &ex)
    {
        throw Error(Errc::Config, "emitter_schema", std::string("malformed emitter block: ") + ex.what());
    }
}

nlohmann::json emitter_to_json(const EmitterModel &model)
{
    const int n = model.dimension();
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    nlohmann::json gre = nlohmann::json::array(), gim = nlohmann::json::array();
    for (int r = 0; r < n; ++r)
    {
        nlohmann::json rr = nlohmann::json::array(), ri = nlohmann::json::array();
        for (int c = 0; c < n; ++c)
        {
            rr.push_back(model.hamiltonian()(r, c).real());
            ri.push_back(model.hamiltonian()(r, c).imag());
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ri));
        gre.push_back(model.coupling()(r).real());
        gim.push_back(model.coupling()(r).imag());
    }
    return {{"n", n},          {"h_m_re", re},       {"h_m_im", im},
            {"gamma_vec_re", gre}, {"gamma_vec_im", gim}, {"gamma_rate", model.rate()},
            {"frequency_unit", model.frequency_unit()}};
}

cdouble susceptibility_complex(const EmitterModel &model, double omega)
{
    require_off_pole(model, omega);
    const CVector x = resolve(model, omega, model.coupling(), true);
    return 0.5 * model.rate() * model.coupling().dot(x);
}

double susceptibility(const EmitterModel &model, double omega)
{
    return susceptibility_complex(model, omega).real();
}

double susceptibility_spectral(const SpectralDecomposition &decomp, double rate, double omega)
{
    const double guard = kPoleGuard * rate;
    double sum = 0.0;
    for (std::size_t k = 0; k < decomp.eigenvalues.size(); ++k)
    {
        const double w = decomp.overlaps[k];
        if (w <= kDarkOverlap)
            continue;
        const double gap = omega - decomp.eigenvalues[k];
        if (std::abs(gap) < guard)
            throw Error(Errc::PoleProximity, "pole_guard",
                        "omega lies within the guard band of eigenvalue " + std::to_string(decomp.eigenvalues[k]));
        sum += w / gap;
    }
    return 0.5 * rate * sum;
}

double d_susceptibility(const EmitterModel &model, double omega, ParameterTag theta)
{
    validate(model, theta);
    require_off_pole(model, omega);
    const Resolvent r = resolvent(model, omega);
    if (theta.is_gamma())
        return r.chi / model.rate();
    return 0.5 * model.rate() * std::norm(r.x(theta.level() - 1));
}

double response(const EmitterModel &model, double omega, ParameterTag theta)
{
    validate(model, theta);
    if (auto k = model.pole_near(omega))
    {
        if (theta.is_gamma())
            return 0.0;
        // Ratio of the leading 1/delta^2 coefficients of 2 d chi and chi^2.
        const Pole &pole = model.poles()[*k];
        return 4.0 * std::norm(pole.projected(theta.level() - 1)) / (model.rate() * pole.weight * pole.weight);
    }
    const Resolvent r = resolvent(model, omega);
    const double denom = 1.0 + r.chi * r.chi;
    if (theta.is_gamma())
        return 2.0 * r.chi / (model.rate() * denom);
    return model.rate() * std::norm(r.x(theta.level() - 1)) / denom;
}

double response_slope(const EmitterModel &model, double omega, ParameterTag theta)
{
    validate(model, theta);
    require_off_pole(model, omega);
    const double rate = model.rate();
    const Resolvent r = resolvent(model, omega);
    const CVector y = resolve(model, omega, r.x, true);
    const double chi = r.chi;
    const double dchi = -0.5 * rate * r.x.squaredNorm();
    const double denom = 1.0 + chi * chi;
    if (theta.is_gamma())
        return (2.0 / rate) * dchi * (1.0 - chi * chi) / (denom * denom);
    const int j = theta.level() - 1;
    const double dtheta = 0.5 * rate * std::norm(r.x(j));
    const double dtheta_slope = -rate * (std::conj(r.x(j)) * y(j)).real();
    return 2.0 * dtheta_slope / denom - 4.0 * dtheta * chi * dchi / (denom * denom);
}

namespace
{
CMatrix effective_generator(const EmitterModel &model)
{
    const cdouble i(0.0, 1.0);
    return i * model.hamiltonian() + 0.5 * model.rate() * model.coupling() * model.coupling().adjoint();
}
} // namespace

cdouble kernel_time(const EmitterModel &model, double t)
{
    if (t < 0.0)
        return 0.0;
    const CMatrix propagator = (-effective_generator(model) * t).exp();
    return model.rate() * model.coupling().dot(propagator * model.coupling());
}

std::vector<cdouble> kernel_time_series(const EmitterModel &model, double dt, std::size_t count)
{
    std::vector<cdouble> out;
    out.reserve(count);
    const CMatrix step = (-effective_generator(model) * dt).exp();
    CVector state = model.coupling();
    for (std::size_t n = 0; n < count; ++n)
    {
        out.push_back(model.rate() * model.coupling().dot(state));
        state = step * state;
    }
    return out;
}

cdouble kernel_freq(const EmitterModel &model, double omega)
{
    if (model.pole_near(omega))
        return 2.0;
    const double chi = susceptibility(model, omega);
    const cdouble i(0.0, 1.0);
    if (std::abs(chi) <= 1.0)
        return 2.0 * i * chi / (1.0 + i * chi);
    return 2.0 * i / (1.0 / chi + i);
}

} // namespace qspec
