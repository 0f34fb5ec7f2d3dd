#pragma once

#include "cggm/types.hpp"

#include <span>
#include <vector>

namespace cggm {

/// sign(x) * max(|x| - lam, 0).
double soft_threshold(double x, double lam);

/// Group graphical lasso penalty. Precision terms run over off-diagonal pairs
/// (i != j, both orderings), transition terms over every entry. The precision
/// diagonal is never penalised.
double ggl_penalty(std::span<const ClassParams> classes, const PenaltyConfig& pen);

enum class ProxSupport {
  all_entries,
  off_diagonal,  // diagonal entries pass through unchanged
};

/// Closed-form proximal operator of alpha * (lam1 * l1 + lam2 * group-l2) for a
/// stack of K equally shaped matrices. Groups are the K values sharing an
/// (i, j) position: each value is soft-thresholded at lam1 * alpha and the
/// group is then shrunk by max(1 - lam2 * alpha / |group|, 0).
std::vector<Matrix> prox_ggl(std::span<const Matrix> d_tilde, double alpha, double lam1,
                             double lam2, ProxSupport support = ProxSupport::all_entries);

void prox_ggl_in_place(std::span<Matrix> stack, double alpha, double lam1, double lam2,
                       ProxSupport support = ProxSupport::all_entries);

}  // namespace cggm
