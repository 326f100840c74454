#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hetnet/network.hpp"

namespace hetnet {

// Point on the incoming section of a node: ||y|| = 1, x inside the unit ball.
struct InSectionPoint {
  std::string node;
  Eigen::VectorXd x;  // expanding chart coordinates, dim u
  Eigen::VectorXd y;  // stable sphere coordinates, dim s, unit norm
};

// Point on the outgoing section: ||phi|| = 1, y inside the unit ball.
struct OutSectionPoint {
  std::string node;
  Eigen::VectorXd phi;  // exit direction on the expanding sphere, dim u
  Eigen::VectorXd y;    // contracted stable coordinates, dim s
};

// Time T > 0 at which sum_j x_j^2 exp(2 lambda_j T) = 1. Bisection on the
// bracket [ln ||x||^(-1/l1), ln ||x||^(-1/lu)] followed by safeguarded Newton;
// final residual <= 1e-12.
// Throws OnStableManifold for x = 0 and OutsideChart for ||x|| >= 1.
double time_of_flight(const Eigen::VectorXd& x, const std::vector<double>& lambda_expanding);

// Exit direction tau_j(x) = exp(lambda_j T(x)) x_j; unit norm up to solver
// residual, signs of nonzero components preserved.
Eigen::VectorXd tau(const Eigen::VectorXd& x, const std::vector<double>& lambda_expanding);

// Flow from the incoming to the outgoing section of one node under the
// linearized dynamics: phi = tau(x), y_out_j = exp(-lambda_{u+j} T) y_j.
OutSectionPoint local_map(const InSectionPoint& p, const EquilibriumSpec& eq);

// Wedge membership: 1 - tau_1(x)^2 < eps^2 (strict). x = 0 is not a member.
bool wedge_membership(const Eigen::VectorXd& x, const std::vector<double>& lambda_expanding,
                      double eps);
// The defect 1 - tau_1(x)^2 itself; +1 for x = 0 (maximal defect, not a member).
double wedge_defect(const Eigen::VectorXd& x, const std::vector<double>& lambda_expanding);

// Global map attached to one connection of the principal cycle. The image
// x-coordinates are M(phi) applied to the contracted stable vector; the image
// y is gamma(phi) = normalize(G phi). Constant matrices by default; M may be
// replaced by an arbitrary map on the expanding sphere.
class TransitionMap {
 public:
  // M: u_next x s_src, G: s_next x u_src. Ranks and the generic condition are
  // checked at evaluation time.
  TransitionMap(Eigen::MatrixXd M, Eigen::MatrixXd G);

  // Default pattern for the given dimensions: rectangular identity, with
  // M(0, s_src-1) = 1/2 added when s_src > 1 so the generic condition holds.
  static TransitionMap defaults(int u_src, int s_src, int u_next, int s_next);

  Eigen::MatrixXd M(const Eigen::VectorXd& phi) const;
  Eigen::VectorXd gamma(const Eigen::VectorXd& phi) const;

  int u_src() const { return u_src_; }
  int s_src() const { return s_src_; }
  int u_next() const { return static_cast<int>(M_.rows()); }
  int s_next() const { return static_cast<int>(G_.rows()); }

  // sup ||M|| over the expanding sphere; exact spectral norm for constant M.
  double zeta() const;
  // sup ||d gamma / d phi||, estimated by central differences over sphere
  // samples and inflated by 10%. Exact 0 for u_src = 1 (two-point domain).
  double chi() const;

  // Throws DegenerateGlobalMap unless (M(e_pm) b_pm)_1 != 0 for both signs.
  void check_generic() const;

  const Eigen::MatrixXd& M_matrix() const { return M_; }
  const Eigen::MatrixXd& G_matrix() const { return G_; }

  // Replaces constant M with a matrix-valued map on the expanding sphere;
  // zeta() is then a sampled supremum inflated by 10%.
  void set_M_map(std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> fn);

 private:
  Eigen::MatrixXd M_, G_;
  int u_src_, s_src_;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> M_fn_;  // optional
};

// Landmarks of one connection: e_pm on the source expanding sphere, b_pm on
// the source stable sphere, y_pm = gamma(e_pm) on the target stable sphere.
struct SectionLandmarks {
  Eigen::VectorXd e_plus, e_minus;
  Eigen::VectorXd b_plus, b_minus;
  Eigen::VectorXd y_plus, y_minus;
};

enum class Region { E, F, B };

// The principal cycle with its local charts and global maps composed into
// section-to-section dynamics.
class SectionMaps {
 public:
  // Network must have a valid principal cycle. Edges without an explicit map
  // get TransitionMap::defaults for their dimensions.
  explicit SectionMaps(NetworkSpec net,
                       std::vector<std::optional<TransitionMap>> edge_maps = {});

  const NetworkSpec& network() const { return net_; }
  int cycle_length() const { return static_cast<int>(sequence_.size()); }
  const std::vector<std::string>& sequence() const { return sequence_; }
  const TransitionMap& edge(int i) const { return maps_[i]; }
  // Landmarks of the connection arriving at principal node i (y_pm live on
  // node i's stable sphere).
  const SectionLandmarks& landmarks_into(int i) const { return landmarks_in_[i]; }

  // One leg of the cycle: local map at p.node followed by the global map to
  // the next principal node.
  InSectionPoint transition_map(const InSectionPoint& p) const;

  // Full circuit (cycle_length legs). Leg errors carry Error::leg.
  InSectionPoint return_map(const InSectionPoint& p) const;

  bool wedge_membership(const InSectionPoint& p, double eps) const;
  double wedge_defect(const InSectionPoint& p) const;
  bool region_membership(const InSectionPoint& p, double delta, Region region) const;

  // Product of per-node rho over the cycle.
  double rho_loop() const;
  // Composed contraction constant: applying the per-leg bound
  // ||x'|| <= zeta_i ||x||^(rho_i) around the cycle gives
  // ||F(x)|| <= zeta_loop() * ||x||^(rho_loop()).
  double zeta_loop() const;
  const DerivedConstants& constants(int i) const { return constants_[i]; }

  int node_index(const std::string& label) const;

 private:
  NetworkSpec net_;
  std::vector<std::string> sequence_;
  std::vector<TransitionMap> maps_;          // maps_[i]: leg i -> i+1
  std::vector<SectionLandmarks> landmarks_in_;  // arriving at node i
  std::vector<DerivedConstants> constants_;
};

}  // namespace hetnet
