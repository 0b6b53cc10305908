#pragma once

#include <cstdint>
#include <vector>

#include "dualpotts/dual_graph.hpp"
#include "dualpotts/estimators.hpp"
#include "dualpotts/model.hpp"

namespace dualpotts {

/// Largest number of terms an exact enumeration may visit.
inline constexpr std::uint64_t kEnumerationLimit = std::uint64_t{1} << 29;

/// Periodic 1D chain: site k couples to site k+1 (mod N) with J_k.
struct Chain1D {
  int q = 2;
  std::vector<double> couplings;

  std::size_t size() const { return couplings.size(); }
  void validate() const;
};

/// Exact ln Z over all q^N primal configurations.
double brute_force_log_z(const PottsModel& model, std::uint64_t limit = kEnumerationLimit);

/// Exact ln Z_d by enumerating the free dual variables (co-tree bonds, plus
/// y_1..y_{N-1} with a field) and completing each configuration.
double brute_force_log_zd(const PottsModel& model, const DualPartition& partition,
                          std::uint64_t limit = kEnumerationLimit);

/// ln of prod (e^J + q - 1) + (q - 1) prod (e^J - 1); equals ln Z = ln Z_d.
double chain_log_z(const Chain1D& chain);

/// Exact ln Z of a chain by enumerating its q^N configurations.
double chain_brute_force_log_z(const Chain1D& chain, std::uint64_t limit = kEnumerationLimit);

/// Exact chi^2(p_d, proposal) over the co-tree configurations, where the
/// proposal is q_d = Gamma_A / Z_qd (importance) or uniform. Field-free only.
double exact_chi_squared(const PottsModel& model, const DualPartition& partition,
                         Method proposal, std::uint64_t limit = kEnumerationLimit);

}  // namespace dualpotts
