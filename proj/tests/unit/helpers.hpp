#pragma once

#include "fibreflow/fibration.hpp"

namespace testing_support {

using namespace fibreflow;

inline FibrationSpec strip_spec(ModulusFamily tau, int nu, int nv, double t0, double t1,
                                GridMode mode = GridMode::symmetric, int nx = 8, int ny = 8) {
    FibrationSpec s;
    s.grid.nx = nx;
    s.grid.ny = ny;
    s.grid.nu = nu;
    s.grid.nv = nv;
    s.grid.t0 = t0;
    s.grid.t1 = t1;
    s.grid.mode = mode;
    s.modulus = tau;
    return s;
}

inline FibrationSpec annulus_spec(ModulusFamily tau, int nu, int nv, double r0, double r1,
                                  GridMode mode = GridMode::symmetric) {
    FibrationSpec s;
    s.grid.nu = nu;
    s.grid.nv = nv;
    s.grid.base = BaseKind::annulus;
    s.grid.r0 = r0;
    s.grid.r1 = r1;
    s.grid.mode = mode;
    s.modulus = tau;
    return s;
}

}  // namespace testing_support
