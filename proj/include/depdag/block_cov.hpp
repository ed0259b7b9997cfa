#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "depdag/gauss.hpp"
#include "depdag/rng.hpp"

namespace depdag {

/// Contiguous partition of n units into blocks.
struct BlockPartition {
  std::vector<int> sizes;
  std::vector<int> offsets;
  int n = 0;

  static BlockPartition contiguous(std::vector<int> block_sizes) {
    BlockPartition part;
    part.sizes = std::move(block_sizes);
    part.offsets.reserve(part.sizes.size());
    int off = 0;
    for (int s : part.sizes) {
      if (s < 1) {
        throw std::invalid_argument("BlockPartition: block sizes must be >= 1");
      }
      part.offsets.push_back(off);
      off += s;
    }
    part.n = off;
    return part;
  }

  int num_blocks() const { return static_cast<int>(sizes.size()); }

  bool operator==(const BlockPartition& other) const {
    return sizes == other.sizes;
  }
};

/// Block-diagonal unit-diagonal covariance over the units, one dense
/// symmetric matrix per block plus cached lower Cholesky factors.
struct BlockCovariance {
  BlockPartition partition;
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<Eigen::MatrixXd> chol;  // empty until factorize()
  std::vector<bool> is_identity;

  static BlockCovariance from_blocks(BlockPartition part,
                                     std::vector<Eigen::MatrixXd> mats,
                                     bool factor = true) {
    if (static_cast<int>(mats.size()) != part.num_blocks()) {
      throw std::invalid_argument("BlockCovariance: block count mismatch");
    }
    BlockCovariance cov;
    cov.partition = std::move(part);
    cov.blocks = std::move(mats);
    for (int b = 0; b < cov.partition.num_blocks(); ++b) {
      const auto& m = cov.blocks[b];
      if (m.rows() != cov.partition.sizes[b] || m.cols() != m.rows()) {
        throw std::invalid_argument("BlockCovariance: block shape mismatch");
      }
      cov.is_identity.push_back(m.isIdentity(0.0));
    }
    if (factor) {
      cov.factorize();
    }
    return cov;
  }

  static BlockCovariance identity(const BlockPartition& part) {
    std::vector<Eigen::MatrixXd> mats;
    mats.reserve(part.num_blocks());
    for (int s : part.sizes) {
      mats.push_back(Eigen::MatrixXd::Identity(s, s));
    }
    return from_blocks(part, std::move(mats));
  }

  static BlockCovariance identity(int n) {
    return identity(BlockPartition::contiguous({n}));
  }

  void factorize() {
    chol.clear();
    chol.reserve(blocks.size());
    for (const auto& m : blocks) {
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() != Eigen::Success) {
        throw std::runtime_error(
            "BlockCovariance: block is not positive definite");
      }
      chol.push_back(llt.matrixL());
    }
  }

  bool factored() const { return chol.size() == blocks.size(); }

  const Eigen::MatrixXd& cholesky(int b) const {
    if (!factored()) {
      throw std::logic_error("BlockCovariance: factorize() before cholesky()");
    }
    return chol[b];
  }

  // Dense n x n matrix, zeros outside the blocks.
  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(partition.n, partition.n);
    for (int b = 0; b < partition.num_blocks(); ++b) {
      const int off = partition.offsets[b];
      const int s = partition.sizes[b];
      full.block(off, off, s, s) = blocks[b];
    }
    return full;
  }
};

/// Orthant constraints for one block: unit i's error lies in
/// (thresholds[i], inf) when sides[i] == greater, (-inf, thresholds[i]]
/// otherwise.
struct TruncationConstraints {
  Eigen::VectorXd thresholds;
  std::vector<TruncSide> sides;

  int size() const { return static_cast<int>(sides.size()); }
};

namespace detail {

inline void check_constraints(const Eigen::MatrixXd& sigma,
                              const TruncationConstraints& c) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != c.size() ||
      c.thresholds.size() != c.size()) {
    throw std::invalid_argument("gibbs_truncated_mvn: size mismatch");
  }
}

// Coordinate sweeps over the truncated normal; each retained state is passed
// to the sink. Full conditionals come from the precision matrix theta.
template <typename Sink>
void gibbs_sweeps(const Eigen::MatrixXd& theta, const TruncationConstraints& c,
                  int n_burn, int n_draws, Rng& rng, Sink&& sink) {
  const int m = c.size();
  Eigen::VectorXd eps(m);
  // feasible start: independent marginal truncated draws (unit variances)
  for (int i = 0; i < m; ++i) {
    eps(i) = sample_truncated_normal(0.0, 1.0, c.sides[i], c.thresholds(i), rng);
  }
  for (int it = 0; it < n_burn + n_draws; ++it) {
    for (int i = 0; i < m; ++i) {
      double dot = 0.0;
      for (int k = 0; k < m; ++k) {
        if (k != i) {
          dot += theta(i, k) * eps(k);
        }
      }
      const double cond_mean = -dot / theta(i, i);
      const double cond_sd = 1.0 / std::sqrt(theta(i, i));
      eps(i) = sample_truncated_normal(cond_mean, cond_sd, c.sides[i],
                                       c.thresholds(i), rng);
    }
    if (it >= n_burn) {
      sink(eps);
    }
  }
}

}  // namespace detail

inline Eigen::MatrixXd block_precision(const Eigen::MatrixXd& sigma_block) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_block);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("block_precision: block is not positive definite");
  }
  return llt.solve(Eigen::MatrixXd::Identity(sigma_block.rows(), sigma_block.rows()));
}

/// Mean of the retained Gibbs states, with the precision matrix precomputed.
inline Eigen::VectorXd gibbs_truncated_mvn_prec(const Eigen::MatrixXd& theta,
                                                const TruncationConstraints& c,
                                                int n_burn, int n_draws,
                                                Rng& rng) {
  detail::check_constraints(theta, c);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(c.size());
  detail::gibbs_sweeps(theta, c, n_burn, n_draws, rng,
                       [&acc](const Eigen::VectorXd& e) { acc += e; });
  return acc / static_cast<double>(n_draws);
}

/// Approximate E(eps | constraints) under N(0, sigma_block) by averaging
/// n_draws post-burn-in Gibbs states.
inline Eigen::VectorXd gibbs_truncated_mvn(const Eigen::MatrixXd& sigma_block,
                                           const TruncationConstraints& c,
                                           int n_burn, int n_draws, Rng& rng) {
  detail::check_constraints(sigma_block, c);
  return gibbs_truncated_mvn_prec(block_precision(sigma_block), c, n_burn,
                                  n_draws, rng);
}

/// All retained states, one row per draw (for diagnostics and tests).
inline Eigen::MatrixXd gibbs_truncated_mvn_draws(
    const Eigen::MatrixXd& sigma_block, const TruncationConstraints& c,
    int n_burn, int n_draws, Rng& rng) {
  detail::check_constraints(sigma_block, c);
  const Eigen::MatrixXd theta = block_precision(sigma_block);
  Eigen::MatrixXd out(n_draws, c.size());
  int row = 0;
  detail::gibbs_sweeps(theta, c, n_burn, n_draws, rng,
                       [&out, &row](const Eigen::VectorXd& e) {
                         out.row(row++) = e.transpose();
                       });
  return out;
}

/// Project each block to positive definiteness: truncate negative
/// eigenvalues, reset the diagonal to one, then shrink off-diagonals by
/// `scale` until the smallest eigenvalue clears the floor.
inline BlockCovariance psd_repair(const BlockCovariance& sigma_hat,
                                  double scale = 0.9) {
  constexpr double kMinEigen = 1e-6;
  constexpr int kMaxRounds = 50;

  std::vector<Eigen::MatrixXd> repaired;
  repaired.reserve(sigma_hat.blocks.size());
  for (const auto& block : sigma_hat.blocks) {
    const int m = static_cast<int>(block.rows());
    EigenDecomposition ed = symmetric_eigen(block);
    Eigen::VectorXd lam = ed.values.cwiseMax(0.0);
    Eigen::MatrixXd fixed = ed.vectors * lam.asDiagonal() * ed.vectors.transpose();
    fixed.diagonal().setOnes();
    bool ok = false;
    for (int round = 0; round < kMaxRounds; ++round) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          if (i != j) {
            fixed(i, j) *= scale;
          }
        }
      }
      if (symmetric_eigen(fixed).values.minCoeff() >= kMinEigen) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw std::runtime_error("psd_repair: block stayed indefinite after 50 rounds");
    }
    repaired.push_back(std::move(fixed));
  }
  return BlockCovariance::from_blocks(sigma_hat.partition, std::move(repaired));
}

/// Per-block whitening operator W_b = C_b^{-1}; cov(W eps) = I when
/// eps ~ N(0, Sigma). Holds copies of the Cholesky factors.
class Whitener {
 public:
  explicit Whitener(const BlockCovariance& sigma)
      : partition_(sigma.partition) {
    if (!sigma.factored()) {
      throw std::logic_error("Whitener: covariance must be factored");
    }
    chol_ = sigma.chol;
    identity_ = std::all_of(sigma.is_identity.begin(), sigma.is_identity.end(),
                            [](bool b) { return b; });
  }

  const BlockPartition& partition() const { return partition_; }
  bool is_identity() const { return identity_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    if (v.size() != partition_.n) {
      throw std::invalid_argument("Whitener: vector length mismatch");
    }
    if (identity_) {
      return v;
    }
    Eigen::VectorXd out(v.size());
    for (int b = 0; b < partition_.num_blocks(); ++b) {
      const int off = partition_.offsets[b];
      const int s = partition_.sizes[b];
      out.segment(off, s) = chol_[b]
                                .triangularView<Eigen::Lower>()
                                .solve(v.segment(off, s));
    }
    return out;
  }

  // column-wise application
  Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& m) const {
    if (m.rows() != partition_.n) {
      throw std::invalid_argument("Whitener: row count mismatch");
    }
    if (identity_) {
      return m;
    }
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (int b = 0; b < partition_.num_blocks(); ++b) {
      const int off = partition_.offsets[b];
      const int s = partition_.sizes[b];
      out.middleRows(off, s) = chol_[b]
                                   .triangularView<Eigen::Lower>()
                                   .solve(m.middleRows(off, s));
    }
    return out;
  }

  // dense W_b, for identity checks in tests
  Eigen::MatrixXd dense(int b) const {
    const int s = partition_.sizes[b];
    return chol_[b].triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd::Identity(s, s));
  }

 private:
  BlockPartition partition_;
  std::vector<Eigen::MatrixXd> chol_;
  bool identity_ = false;
};

inline Whitener whitening_factor(const BlockCovariance& sigma) {
  return Whitener(sigma);
}

/// eps ~ N(0, Sigma) drawn blockwise through the cached Cholesky factors.
inline Eigen::VectorXd sample_block_normal(const BlockCovariance& sigma,
                                           Rng& rng) {
  Eigen::VectorXd out(sigma.partition.n);
  for (int b = 0; b < sigma.partition.num_blocks(); ++b) {
    const int off = sigma.partition.offsets[b];
    const int s = sigma.partition.sizes[b];
    Eigen::VectorXd z(s);
    for (int i = 0; i < s; ++i) {
      z(i) = standard_normal(rng);
    }
    if (sigma.is_identity[b]) {
      out.segment(off, s) = z;
    } else {
      out.segment(off, s) = sigma.cholesky(b) * z;
    }
  }
  return out;
}

}  // namespace depdag
