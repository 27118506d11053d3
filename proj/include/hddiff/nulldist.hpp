#pragma once

#include "hddiff/dataset.hpp"
#include "hddiff/linalg.hpp"
#include "hddiff/params.hpp"
#include "hddiff/screening.hpp"

namespace hddiff {

enum class BEstimator { Plugin, Sample };

const char* to_string(BEstimator e);
BEstimator parse_b_estimator(const std::string& s);

// Decomposition of a weight vector: zeros, forced +1/-1 entries and the
// number of +-sqrt(1 - mu) pairs.
struct NullWeights {
  Vector nu;
  int r = 0;
  int n_zero = 0;
  int n_plus_one = 0;
  int n_minus_one = 0;
  int n_paired = 0;
  int clamp_events = 0;
  double max_clamp = 0.0;  // largest |mu - clamp(mu)|
  int jitter_events = 0;
};

// Residual cross-moment blocks of one population c, with J projected out:
//   q_uv_c = Q^c(ring_uv, ring_c) at (phi_uv, phi_c)
//   q_c    = Q^c(ring_c, ring_c)  at (phi_c, phi_c)
//   q_uv   = Q^c(ring_uv, ring_uv) at (phi_uv, phi_uv)
struct PopulationQ {
  Matrix q_uv_c;
  Matrix q_c;
  Matrix q_uv;
};

struct QBlocks {
  PopulationQ u, v;
  int jitter_events = 0;
};

// B_ab - B_aJ (B_JJ)^{-1} B_Jb for a block laid out J-first in both rows and
// columns. B_JJ gets a relative ridge of 1e-8 once when ill-conditioned.
Matrix compute_q(const Matrix& b_full, int j_size, int* jitter_events = nullptr);

// Cross-moment estimate B^c_{rows,cols}(phi_a; phi_b) on population c's data.
Matrix estimate_b(BEstimator estimator, const Params& c, const Params& a, const Params& b, const IndexSet& rows,
                  const IndexSet& cols, const Dataset& c_data);

QBlocks estimate_q(const ActiveSets& sets, const Params& phi_u, const Params& phi_v, const Params& phi_uv,
                   const Dataset& u_out, const Dataset& v_out, BEstimator estimator);

NullWeights weights_prop2(const QBlocks& q, const ActiveSets& sets);

// Blocks of the direct weight matrix:
//   ind       = blockdiag(B^u_{I_u}(phi_u), B^v_{I_v}(phi_v))
//   joint     = B^u_{I_uv}(phi_uv) + B^v_{I_uv}(phi_uv)
//   joint_ind = (B^u_{I_uv,I_u}(phi_uv; phi_u), B^v_{I_uv,I_v}(phi_uv; phi_v))
struct DirectBlocks {
  Matrix ind;
  Matrix joint;
  Matrix joint_ind;
};

DirectBlocks estimate_direct_blocks(const ActiveSets& sets, const Params& phi_u, const Params& phi_v,
                                    const Params& phi_uv, const Dataset& u_out, const Dataset& v_out,
                                    BEstimator estimator);

// Eigenvalues of [[I, -B_ind,joint B_joint^{-1}], [B_joint,ind B_ind^{-1}, -I]].
NullWeights weights_direct(const DirectBlocks& blocks);

// P(sum nu_j Z_j^2 <= x) for independent standard normal Z_j.
double wchisq_cdf(double x, const Vector& nu);

// 1 - wchisq_cdf(lr, nu), clamped to [0, 1].
double pvalue(double lr, const Vector& nu);

}  // namespace hddiff
