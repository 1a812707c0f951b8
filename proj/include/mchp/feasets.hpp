#pragma once

#include "mchp/primal.hpp"

#include <string>
#include <vector>

namespace mchp {

enum class SetMethod { ExactFixedLoad, ExactPriceSensitive, ConsumerMirror, CapSweep };
std::string method_name(SetMethod m);

// Inflation radius for the modified sets: either the +0 limit or a positive
// per-period quantity.
template <class T>
struct Epsilon {
  bool limit = true;
  std::vector<T> value;

  static Epsilon plus_zero() { return {}; }
  static Epsilon uniform(const T& e, int periods) { return {false, std::vector<T>(periods, e)}; }
  std::string str() const { return limit ? "+0" : Num<T>::text(value.at(0)); }
};

template <class T>
struct OpportunitySets {
  std::vector<StatusOutputSet<T>> omega_bar, psi;
  std::vector<SetMethod> method;
  T resolution{1};

  StatusOutputSet<T> modified(const Market<T>& m, int player, const Epsilon<T>& eps) const;
};

struct Membership {
  bool member = false;
  std::string reason;
};

// Fixed-point test: the point is optimal for the primal capped at itself.
template <class T>
Membership opportunity_membership(const Market<T>& m, const DispatchPoint<T>& candidate);

template <class T>
StatusOutputSet<T> omega_bar_fixed_load(const Market<T>& m, int player);

template <class T>
StatusOutputSet<T> omega_bar_price_sensitive(const Market<T>& m, int player);

template <class T>
StatusOutputSet<T> omega_bar_consumer(const Market<T>& m, int consumer, const T& resolution = T(1));

struct SweepOptions {
  bool refine = true;  // secant refinement of single-period interval ends
  std::size_t max_points = 4'000'000;
};

template <class T>
std::vector<StatusOutputSet<T>> cap_sweep_all(const Market<T>& m, const T& resolution,
                                              const SweepOptions& opt = {});
template <class T>
StatusOutputSet<T> cap_sweep(const Market<T>& m, int player, const T& resolution);

template <class T>
StatusOutputSet<T> psi_set(const Market<T>& m, int player);

template <class T>
StatusOutputSet<T> modified_set(const Player<T>& p, const StatusOutputSet<T>& omega_bar,
                                const StatusOutputSet<T>& psi, const Epsilon<T>& eps);

template <class T>
OpportunitySets<T> build_opportunity_sets(const Market<T>& m, const T& resolution = T(1),
                                          bool force_sweep = false);

}  // namespace mchp
