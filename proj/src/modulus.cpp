#include "fibreflow/modulus.hpp"

#include <numbers>

namespace fibreflow {

namespace {
constexpr cplx two_pi_i{0.0, 2.0 * std::numbers::pi};
}

ModulusFamily ModulusFamily::constant(cplx tau0) { return {ModulusKind::constant, tau0, 0.0}; }
ModulusFamily ModulusFamily::affine(cplx tau0, cplx c) { return {ModulusKind::affine, tau0, c}; }
ModulusFamily ModulusFamily::nome_log() { return {ModulusKind::nome_log, 0.0, 0.0}; }

std::string ModulusFamily::name() const {
    switch (kind_) {
        case ModulusKind::constant: return "constant";
        case ModulusKind::affine: return "affine";
        case ModulusKind::nome_log: return "nome-log";
    }
    return "?";
}

ModulusSample ModulusFamily::at_w(cplx w, BaseKind base) const {
    switch (kind_) {
        case ModulusKind::constant: return {tau0_, 0.0};
        case ModulusKind::nome_log: return {w, 1.0};
        case ModulusKind::affine:
            if (base == BaseKind::strip) return {tau0_ + c_ * w, c_};
            {
                const cplx y = std::exp(two_pi_i * w);
                return {tau0_ + c_ * y, c_ * two_pi_i * y};
            }
    }
    return {tau0_, 0.0};
}

ModulusSample ModulusFamily::at_q(cplx q) const {
    switch (kind_) {
        case ModulusKind::constant: return {tau0_, 0.0};
        case ModulusKind::affine: return {tau0_ + c_ * q, c_};
        case ModulusKind::nome_log: return {std::log(q) / two_pi_i, 1.0 / (two_pi_i * q)};
    }
    return {tau0_, 0.0};
}

double ks_norm_squared(const ModulusSample& m) {
    const double b = m.tau.imag();
    return std::norm(m.dtau) / (4.0 * b * b);
}

}  // namespace fibreflow
