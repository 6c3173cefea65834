#pragma once

#include "pmimo/types.hpp"

namespace pmimo::test {

inline SystemParams small_params(int K = 64, int M = 8, int D = 2, int L = 2)
{
    SystemParams p;
    p.K = K;
    p.M = M;
    p.D = D;
    p.L = L;
    return p;
}

inline double max_abs(const MatrixXcd& A)
{
    return A.size() ? A.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace pmimo::test
