#ifndef FRACWEST_COMMON_HPP
#define FRACWEST_COMMON_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace fracwest {

/// Requested accuracy could not be reached by any evaluation regime.
class convergence_error : public std::runtime_error {
public:
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

/// Contour quadrature produced weights with an imaginary residue above tolerance.
class contour_accuracy_error : public convergence_error {
public:
    contour_accuracy_error(const std::string& what, double residue)
        : convergence_error(what), imag_residue(residue) {}
    double imag_residue;
};

/// A matrix expected to be SPD turned out not to be (nonpositive pivot or
/// stalled CG).  Carries the residual reached before giving up.
class non_spd_error : public std::runtime_error {
public:
    non_spd_error(const std::string& what, double residual_)
        : std::runtime_error(what), residual(residual_) {}
    double residual;
};

/// The quasilinear coefficient 1 - 2k*u dropped below the admissible
/// threshold; the solution is (numerically) forming a shock.
class degeneracy_error : public std::runtime_error {
public:
    degeneracy_error(const std::string& what, double coeff_min_, double time_)
        : std::runtime_error(what), coeff_min(coeff_min_), time(time_) {}
    double coeff_min;
    double time;
};

/// Newton iteration failed to reduce the residual within the allowed
/// iterations.  The trace holds the residual norm after each iteration.
class newton_divergence_error : public std::runtime_error {
public:
    newton_divergence_error(const std::string& what, std::vector<double> trace_)
        : std::runtime_error(what), trace(std::move(trace_)) {}
    std::vector<double> trace;
};

} // namespace fracwest

#endif
