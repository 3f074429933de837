#pragma once

#include <complex>
#include <string>

namespace fibreflow {

using cplx = std::complex<double>;

enum class BaseKind { strip, annulus };

enum class ModulusKind { constant, affine, nome_log };

struct ModulusSample {
    cplx tau;
    cplx dtau;  // derivative with respect to the parameter that was passed in
};

/// The holomorphic modulus tau of the torus fibers C / (Z + tau Z).
///
/// The base grid coordinate is w = u + i v. The disc coordinate s is w on a
/// strip and y = exp(2 pi i w) on an annulus. Families:
///   constant  tau = tau0
///   affine    tau = tau0 + c * s
///   nome-log  tau = w  (= log y / 2 pi i, the unipotent degeneration at y = 0)
class ModulusFamily {
public:
    static ModulusFamily constant(cplx tau0);
    static ModulusFamily affine(cplx tau0, cplx c);
    static ModulusFamily nome_log();

    ModulusKind kind() const noexcept { return kind_; }
    cplx tau0() const noexcept { return tau0_; }
    cplx slope() const noexcept { return c_; }
    std::string name() const;

    /// tau and d tau / dw at grid coordinate w, for a base of the given kind.
    ModulusSample at_w(cplx w, BaseKind base) const;

    /// tau and d tau / dq in the degeneration parameter q: the nome y for
    /// nome-log, the disc coordinate s otherwise. Degeneration point q = 0.
    ModulusSample at_q(cplx q) const;

private:
    ModulusFamily(ModulusKind k, cplx tau0, cplx c) : kind_(k), tau0_(tau0), c_(c) {}
    ModulusKind kind_;
    cplx tau0_;
    cplx c_;
};

/// Pointwise norm^2 of the harmonic Kodaira-Spencer representative against a
/// unit-area flat fiber metric: |tau'|^2 / (2 Im tau)^2.
double ks_norm_squared(const ModulusSample& m);

}  // namespace fibreflow
