#pragma once

// Assembles the geometric-side bound: enumerates elliptic classes and
// hyperbolic units inside the scale-dependent windows, combines every term
// with the normalizer 2^{r1} / (A_J prod h_a(0)), and produces the final
// count-bound report. Also hosts the deterministic sweep driver.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "arch_orbital.hpp"
#include "local_orbital.hpp"
#include "numfield.hpp"
#include "testfn.hpp"
#include "zeta.hpp"

namespace tracebound {

enum class Mode { Rigorous, Numeric };

struct AssemblyConfig {
  std::vector<double> a;        // per-archimedean-place scalings in (0,1]; empty = auto
  Mode mode = Mode::Rigorous;
  bool paper_losses = false;    // per-class coefficients via the coarse product chain
  double covolume_constant = M_PI / 3.0;
  std::string covolume_provenance =
      "hyperbolic area of the level-one fundamental domain, 2*integral_0^{1/2} dx/sqrt(1-x^2)";
  double idele_volume_constant = 1.0;
  std::string idele_volume_provenance = "unit normalization Vol(O_v^x) = 1 at every finite place";
  double haar_match_constant = 1.0;  // measure-matching constant at rotated real centralizers
  std::size_t class_cap = std::size_t(1) << 26;  // elliptic enumeration guard
  double bump_support = 1.0;
  double grid_resolution = 5e-4;
};

struct TermEntry {
  double value = 0.0;
  bool ok = true;
  std::string note;
};

struct TraceBoundReport {
  std::string field_spec;
  long long ideal_norm = 1;
  long long gamma0_index = 1;
  double a_j = 1.0;
  std::vector<double> a;
  bool a_capped = false;
  Mode mode = Mode::Rigorous;
  bool paper_losses = false;
  TermEntry one, id, ell, hyp, par, eis, res;
  double h0_product = 1.0;
  double normalizer = 0.0;
  double total = 0.0;
  double ratio = 0.0;  // total (log A)^{2 r1 + 3 r2} / index
  std::size_t elliptic_class_count = 0;
  std::size_t hyperbolic_unit_count = 0;
  std::string covolume_provenance, idele_volume_provenance;
  bool all_ok() const { return one.ok && id.ok && ell.ok && hyp.ok && par.ok && eis.ok && res.ok; }
};

// ---- windows ---------------------------------------------------------------

inline double elliptic_m_window(double a_v, int eps_v, double abs_u_embed) {
  return 2.0 * std::exp(2.0 * M_PI / (a_v * (1.0 + eps_v))) * std::sqrt(abs_u_embed);
}

inline double elliptic_disc_window(double a_v, int eps_v, double abs_u_embed) {
  return 8.0 * std::exp(4.0 * M_PI / (a_v * (1.0 + eps_v))) * abs_u_embed;
}

inline double hyperbolic_window(double a_v, int eps_v) {
  return std::exp(4.0 * M_PI / (a_v * (1.0 + eps_v)));
}

// ---- elliptic classes -------------------------------------------------------

struct LocalClassPlace {
  PrimePlaceData place;
  int e = 0;        // level exponent at the place
  int f = 0;        // valuation of m^2 - 4u
  int nroots = 0;   // roots of t^2 - m t + u in the residue field
};

struct EllipticClass {
  FieldElement m, u;
  long long disc_norm_abs = 1;  // B = |N(m^2 - 4u)|
  std::vector<ArchEllipticInput> arch;
  int nonsplit_places = 0;  // real embeddings with negative discriminant
  int r2_extension = 0;     // complex pairs of E = F(sqrt(m^2-4u))
};

// Degree-driven count bound for the (m,u) window of one unit class: the
// coefficients of the minimal polynomial of m are bounded by the embedding
// window, so the element count is at most n (2 prod (M_v+1)^{1+eps_v})^n.
inline double elliptic_count_bound(const NumberFieldDescriptor& F, const std::vector<double>& a,
                                   FieldElement u) {
  const auto kinds = F.arch_kinds();
  const auto ue = fe_embeddings(F, u);
  double prod = 1.0;
  for (std::size_t v = 0; v < kinds.size(); ++v) {
    const int eps = place_epsilon(kinds[v]);
    prod *= std::pow(elliptic_m_window(a[v], eps, std::abs(ue[v])) + 1.0, 1.0 + eps);
  }
  return double(F.degree) * std::pow(2.0 * prod, double(F.degree));
}

// Visits all elliptic classes (m, u) inside the window constraints
// |sigma_v(m)| < M_v and |sigma_v(m^2-4u)| < disc window, m^2-4u not a
// square, in a deterministic order, without materializing the set.
template <class Visitor>
void for_each_elliptic_class(const NumberFieldDescriptor& F, const std::vector<double>& a,
                             std::size_t class_cap, Visitor&& visit) {
  const auto kinds = F.arch_kinds();
  if (a.size() != kinds.size()) throw std::invalid_argument("for_each_elliptic_class: one a_v per place");
  for (const FieldElement& u : unit_square_classes(F)) {
    const auto ue = fe_embeddings(F, u);
    std::vector<double> M(kinds.size());
    for (std::size_t v = 0; v < kinds.size(); ++v)
      M[v] = elliptic_m_window(a[v], place_epsilon(kinds[v]), std::abs(ue[v]));
    // the lattice enumerator guards the window size (never silently truncate)
    for (const FieldElement& m : enumerate_bounded_elements(F, M, class_cap)) {
      const FieldElement D = fe_sub(fe_mul(F, m, m), fe_add(fe_add(u, u), fe_add(u, u)));
      if (D == FieldElement{0, 0} || fe_is_square(F, D)) continue;
      const auto me = fe_embeddings(F, m);
      const auto De = fe_embeddings(F, D);
      bool inside = true;
      for (std::size_t v = 0; v < kinds.size() && inside; ++v) {
        const int eps = place_epsilon(kinds[v]);
        if (!(std::abs(me[v]) < M[v])) inside = false;
        if (!(std::abs(De[v]) < elliptic_disc_window(a[v], eps, std::abs(ue[v])))) inside = false;
      }
      if (!inside) continue;
      EllipticClass cl;
      cl.m = m;
      cl.u = u;
      cl.disc_norm_abs = std::llabs(fe_norm(F, D));
      for (std::size_t v = 0; v < kinds.size(); ++v) {
        cl.arch.push_back(make_arch_elliptic_input(kinds[v], me[v], ue[v]));
        if (!cl.arch.back().split) ++cl.nonsplit_places;
      }
      cl.r2_extension = 2 * F.r2 + cl.nonsplit_places;
      visit(cl);
    }
  }
}

inline std::vector<EllipticClass> enumerate_elliptic_classes(const NumberFieldDescriptor& F,
                                                             const std::vector<double>& a,
                                                             std::size_t class_cap = std::size_t(1) << 26) {
  std::vector<EllipticClass> classes;
  for_each_elliptic_class(F, a, class_cap, [&](const EllipticClass& cl) { classes.push_back(cl); });
  return classes;
}

// Local data of a class at every finite place with e_v + f_v > 0.
inline std::vector<LocalClassPlace> elliptic_local_places(const NumberFieldDescriptor& F, const IdealData& J,
                                                          const EllipticClass& cl) {
  const FieldElement D =
      fe_sub(fe_mul(F, cl.m, cl.m), fe_add(fe_add(cl.u, cl.u), fe_add(cl.u, cl.u)));
  std::vector<LocalClassPlace> out;
  std::vector<long long> primes;
  for (auto [p, e] : factor_integer(J.norm)) primes.push_back(p);
  for (auto [p, e] : factor_integer(cl.disc_norm_abs))
    if (std::find(primes.begin(), primes.end(), p) == primes.end()) primes.push_back(p);
  std::sort(primes.begin(), primes.end());
  for (long long p : primes) {
    std::vector<PrimePlaceData> places;
    if (F.kind == FieldKind::Rational) {
      places.push_back({p, p, 1, SplitType::Split, 0});
    } else {
      const SplitType st = splitting_type(F, p);
      if (st == SplitType::Split) {
        places.push_back({p, p, 1, SplitType::Split, 0});
        places.push_back({p, p, 1, SplitType::Split, 1});
      } else if (st == SplitType::Inert) {
        places.push_back({p, p * p, 2, SplitType::Inert, 0});
      } else {
        places.push_back({p, p, 1, SplitType::Ramified, 0});
      }
    }
    for (const auto& pl : places) {
      LocalClassPlace lp;
      lp.place = pl;
      for (const auto& jf : J.factors)
        if (jf.place.p == pl.p && jf.place.conjugate_index == pl.conjugate_index) lp.e = jf.e;
      lp.f = place_valuation(F, pl, D);
      lp.nroots = residue_root_count(F, pl, cl.m, cl.u);
      if (lp.e + lp.f > 0) out.push_back(lp);
    }
  }
  return out;
}

// Volume factor of the class: the measure of the centralizer quotient,
// bounded through the class-number-regulator estimate with the conductor-safe
// discriminant proxy |Delta_E| <= Delta_F^2 4^n B.
inline double elliptic_volume_factor(const NumberFieldDescriptor& F, const EllipticClass& cl,
                                     const AssemblyConfig& cfg) {
  const int n = F.degree;
  const double deltaE =
      double(F.discriminant) * double(F.discriminant) * std::pow(4.0, n) * double(cl.disc_norm_abs);
  const double clreg = std::pow(2.0 / M_PI, cl.r2_extension) *
                       std::pow(std::exp(1.0) * std::log(deltaE) / (4.0 * (2.0 * n - 1.0)), 2.0 * n - 1.0) *
                       std::sqrt(deltaE);
  return std::pow(cfg.haar_match_constant, cl.nonsplit_places) * clreg / cfg.idele_volume_constant;
}

// Global coefficient of one elliptic class: volume factor times the finite
// place products. Places with e = f = 0 cancel exactly against the orbital
// factor (the root count there is 0 or 2) and are skipped. Rigorous mode uses
// the per-place bounds, numeric mode the exact truncated series at degree-one
// places. paper_losses swaps in the coarse chain B^5 2^{n w(A)} 4^{n w(AB)}
// A^{-1} B^{1/2}.
inline double elliptic_global_coefficient(const NumberFieldDescriptor& F, const IdealData& J,
                                          const EllipticClass& cl, const AssemblyConfig& cfg, Mode mode) {
  const double volfac = elliptic_volume_factor(F, cl, cfg);
  if (cfg.paper_losses) {
    const double B = double(cl.disc_norm_abs);
    const long long AB = J.norm * cl.disc_norm_abs;
    const double omegaA = double(factor_integer(J.norm).size());
    const double omegaAB = double(factor_integer(AB).size());
    return volfac * std::pow(B, 5.0) * std::pow(2.0, F.degree * omegaA) *
           std::pow(4.0, F.degree * omegaAB) / double(J.norm) * std::sqrt(B);
  }
  double fin = 1.0;
  for (const auto& lp : elliptic_local_places(F, J, cl)) {
    const double q = double(lp.place.q);
    if (lp.f > 0)
      fin *= elliptic_unit_volume_bound(q, lp.f, lp.nroots);
    else if (lp.e > 0)
      fin *= elliptic_unit_volume_bound(q, 0, lp.nroots);
    // exact series only where the local ring of integers is Z_p (split places
    // and the rational field); inert and ramified places keep the bound
    if (mode == Mode::Numeric &&
        (F.kind == FieldKind::Rational || lp.place.split == SplitType::Split)) {
      const long long p = lp.place.p;
      const int conj = lp.place.conjugate_index;
      auto counts = [&F, &cl, p, conj](int alpha) {
        long long mod = 1;
        for (int i = 0; i < alpha; ++i) {
          if (mod > (long long)2e17 / p) throw std::overflow_error("elliptic series: modulus overflow");
          mod *= p;
        }
        long long mm, uu;
        if (F.kind == FieldKind::Rational) {
          mm = cl.m.a;
          uu = cl.u.a;
        } else {
          const long long r = detail::omega_root_mod(F, p, alpha, conj);
          mm = detail::mod_pos(detail::mod_pos(cl.m.a, mod) + detail::mulmod(detail::mod_pos(cl.m.b, mod), r, mod), mod);
          uu = detail::mod_pos(detail::mod_pos(cl.u.a, mod) + detail::mulmod(detail::mod_pos(cl.u.b, mod), r, mod), mod);
        }
        return detail::root_count_fast(p, alpha, mm, uu);
      };
      fin *= elliptic_local_exact_series(q, lp.e, lp.f, counts);
    } else {
      fin *= elliptic_local_bound(q, lp.e, lp.f, lp.nroots);
    }
  }
  return volfac * fin;
}

// Closed-form aggregate bound for the elliptic term (uniform over the window,
// no enumeration): count bound x worst-case class coefficient x worst-case
// archimedean factors. Valid for every level; intentionally coarse.
inline double elliptic_term_closed_form(const NumberFieldDescriptor& F, const IdealData& J,
                                        const std::vector<TestFunctionPair>& pairs,
                                        const std::vector<double>& a, const AssemblyConfig& cfg) {
  const auto kinds = F.arch_kinds();
  const int n = F.degree;
  const double omegaA = double(factor_integer(J.norm).size());
  double total = 0.0;
  for (const FieldElement& u : unit_square_classes(F)) {
    const auto ue = fe_embeddings(F, u);
    const double count = elliptic_count_bound(F, a, u);
    double bmax = 1.0, log_bmax_terms = 0.0;
    std::vector<double> disc_win(kinds.size());
    for (std::size_t v = 0; v < kinds.size(); ++v) {
      const int eps = place_epsilon(kinds[v]);
      disc_win[v] = elliptic_disc_window(a[v], eps, std::abs(ue[v]));
      bmax *= std::pow(disc_win[v], 1.0 + eps);
    }
    log_bmax_terms = std::log2(std::max(bmax, 2.0));
    const double deltaE = double(F.discriminant) * double(F.discriminant) * std::pow(4.0, n) * bmax;
    const double clreg =
        std::pow(std::exp(1.0) * std::log(deltaE) / (4.0 * (2.0 * n - 1.0)), 2.0 * n - 1.0) * std::sqrt(deltaE);
    const double volfac = std::pow(std::max(1.0, cfg.haar_match_constant), F.r1) * clreg /
                          cfg.idele_volume_constant;
    const double finworst = std::pow(bmax, 5.0) * std::pow(2.0, n * omegaA) *
                            std::pow(4.0, n * (omegaA + log_bmax_terms)) / double(J.norm) * std::sqrt(bmax);
    double archworst = 1.0;
    for (std::size_t v = 0; v < kinds.size(); ++v) {
      const int eps = place_epsilon(kinds[v]);
      // per-place lower bound for |sigma_v(m^2-4u)| from |N| >= 1
      double lower = 1.0;
      for (std::size_t w = 0; w < kinds.size(); ++w)
        if (w != v) lower /= std::pow(disc_win[w], 1.0 + place_epsilon(kinds[w]));
      lower = std::pow(lower, 1.0 / (1.0 + eps));
      const double split_worst =
          (1.0 + eps) / (2.0 * M_PI) * std::pow(std::abs(ue[v]) / lower, 0.5 * (1.0 + eps));
      double worst = split_worst;
      if (kinds[v] == ArchPlaceKind::Real) {
        const double nonsplit_worst = std::abs(ue[v]) / lower * h_eval(pairs[v], 0.0) / std::sqrt(2.0);
        worst = std::max(worst, nonsplit_worst);
      }
      archworst *= worst;
    }
    total += count * volfac * finworst * archworst;
  }
  return total;
}

// ---- hyperbolic -------------------------------------------------------------

// Units alpha != 1 with every embedding modulus inside the scale window.
inline std::vector<FieldElement> enumerate_hyperbolic_units(const NumberFieldDescriptor& F,
                                                            const std::vector<double>& a) {
  const auto kinds = F.arch_kinds();
  double widest = 1.0;
  for (std::size_t v = 0; v < kinds.size(); ++v)
    widest = std::max(widest, hyperbolic_window(a[v], place_epsilon(kinds[v])));
  auto candidates = units_in_window(F, 1.0 / widest, widest);
  std::vector<FieldElement> out;
  for (const auto& al : candidates) {
    const auto emb = fe_embeddings(F, al);
    bool inside = true;
    for (std::size_t v = 0; v < kinds.size() && inside; ++v) {
      const double w = hyperbolic_window(a[v], place_epsilon(kinds[v]));
      const double m = std::abs(emb[v]);
      if (!(m > 1.0 / w && m < w)) inside = false;
    }
    if (inside) out.push_back(al);
  }
  return out;
}

namespace detail {

// Archimedean hyperbolic factors without the positive-determinant
// shortcut, used by the rigorous chain (which never exploits sign vanishing).
inline double hyp_arch_unweighted_bound(ArchPlaceKind kind, std::complex<double> alpha) {
  const int eps = place_epsilon(kind);
  std::complex<double> al = alpha;
  if (std::abs(al) < 1.0) al = 1.0 / std::conj(al);
  return (1.0 + eps) * std::pow(std::abs(al), 0.5 * (1.0 + eps)) /
         (2.0 * M_PI * std::pow(std::abs(al - 1.0), 1.0 + eps));
}

inline double hyp_arch_weighted_bound(const TestFunctionPair& pair, ArchPlaceKind kind,
                                      std::complex<double> alpha) {
  const int eps = place_epsilon(kind);
  std::complex<double> al = alpha;
  if (std::abs(al) < 1.0) al = 1.0 / std::conj(al);
  const double am = std::abs(al);
  const double sup = pair.support_radius;
  const double lo = kind == ArchPlaceKind::Real ? std::log(am) / (2.0 * M_PI) : std::log(am) / M_PI;
  if (lo >= sup) return 0.0;
  const double pref = 2.0 * am / std::norm(al - 1.0);
  if (kind == ArchPlaceKind::Real)
    return pref * integrate([&](double t) { return pair.hhat(t) * std::cosh(M_PI * t); }, lo, sup,
                            std::min(quad_tolerance(), 1e-11));
  const double cosdir = al.real() / am;
  return pref * integrate(
                    [&](double t) {
                      return pair.hhat(t) * std::sinh(M_PI * t) / (std::cosh(M_PI * t) - cosdir);
                    },
                    lo, sup, std::min(quad_tolerance(), 1e-11));
}

}  // namespace detail

// Hyperbolic term: (Vol(F^x\A^1)/2) sum over window units of the global
// J_alpha assembly: the finite part collapses to |N(alpha-1)| A^{-1/2} with a
// 2 log|N(alpha-1)| factor on the finite-weighted piece.
inline double hyperbolic_term(const NumberFieldDescriptor& F, const IdealData& J,
                              const std::vector<TestFunctionPair>& pairs, const std::vector<double>& a,
                              const AssemblyConfig& cfg, Mode mode, std::size_t* unit_count = nullptr) {
  const auto kinds = F.arch_kinds();
  const auto units = enumerate_hyperbolic_units(F, a);
  if (unit_count) *unit_count = units.size();
  double total = 0.0;
  for (const FieldElement& al : units) {
    const FieldElement alm1 = fe_sub(al, {1, 0});
    const double nrm = std::abs(double(fe_norm(F, alm1)));
    const double fin = nrm / std::sqrt(double(J.norm));
    const auto emb = fe_embeddings(F, al);
    std::vector<double> U(kinds.size()), W(kinds.size());
    for (std::size_t v = 0; v < kinds.size(); ++v) {
      if (mode == Mode::Rigorous) {
        U[v] = detail::hyp_arch_unweighted_bound(kinds[v], emb[v]);
        W[v] = detail::hyp_arch_weighted_bound(pairs[v], kinds[v], emb[v]);
      } else {
        U[v] = arch_hyperbolic(pairs[v], kinds[v], emb[v], false);
        W[v] = std::abs(arch_hyperbolic(pairs[v], kinds[v], emb[v], true));
      }
    }
    double uprod = 1.0;
    for (double x : U) uprod *= x;
    double sum = 2.0 * std::log(std::max(nrm, 1.0)) * uprod;
    for (std::size_t w = 0; w < kinds.size(); ++w) {
      double term = W[w];
      for (std::size_t v = 0; v < kinds.size(); ++v)
        if (v != w) term *= U[v];
      sum += term;
    }
    total += fin * sum;
  }
  return 0.5 * cfg.idele_volume_constant * total;
}

// ---- shared caches ----------------------------------------------------------

inline const TestFunctionPair& cached_base_pair(double bump_support, double grid_resolution) {
  static std::mutex mu;
  static std::map<std::pair<double, double>, TestFunctionPair> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({bump_support, grid_resolution});
  if (it == cache.end())
    it = cache.emplace(std::make_pair(bump_support, grid_resolution),
                       build_base_pair(bump_support, grid_resolution)).first;
  return it->second;
}

inline const ZetaBundle& cached_zeta_bundle(const NumberFieldDescriptor& F) {
  static std::mutex mu;
  static std::map<std::pair<int, long long>, std::unique_ptr<ZetaBundle>> cache;
  std::lock_guard<std::mutex> lock(mu);
  const std::pair<int, long long> key{int(F.kind), F.quad_d};
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<ZetaBundle>(F)).first;
  return *it->second;
}

// ---- the assembly -----------------------------------------------------------

inline std::string field_spec_string(const NumberFieldDescriptor& F) {
  return F.kind == FieldKind::Rational ? "Q" : "quad:" + std::to_string(F.quad_d);
}

inline TraceBoundReport assemble_bound(const NumberFieldDescriptor& F, const IdealData& J,
                                       AssemblyConfig cfg) {
  const auto kinds = F.arch_kinds();
  TraceBoundReport rep;
  rep.field_spec = field_spec_string(F);
  rep.ideal_norm = J.norm;
  rep.gamma0_index = J.gamma0_index;
  rep.a_j = J.a_j();
  rep.mode = cfg.mode;
  rep.paper_losses = cfg.paper_losses;
  rep.covolume_provenance = cfg.covolume_provenance;
  rep.idele_volume_provenance = cfg.idele_volume_provenance;

  // scale parameters
  if (cfg.a.empty()) {
    const double logA = std::log(double(J.norm));
    double auto_a = logA > 0.0 ? 8.0 * M_PI * F.degree * (F.degree + 13.0) / logA : 2.0;
    if (auto_a > 1.0) {
      auto_a = 1.0;
      rep.a_capped = true;
    }
    cfg.a.assign(kinds.size(), auto_a);
  }
  if (cfg.a.size() != kinds.size()) throw std::invalid_argument("assemble_bound: need one a_v per place");
  for (double av : cfg.a)
    if (!(av > 0.0 && av <= 1.0)) throw std::invalid_argument("assemble_bound: a_v must lie in (0,1]");
  rep.a = cfg.a;

  const TestFunctionPair& base = cached_base_pair(cfg.bump_support, cfg.grid_resolution);
  std::vector<TestFunctionPair> pairs;
  for (double av : cfg.a) pairs.push_back(scale_pair(base, av));
  const ZetaBundle& zeta = cached_zeta_bundle(F);
  const auto dims = fixed_vector_dim_bound(F, J);

  rep.h0_product = 1.0;
  for (const auto& p : pairs) rep.h0_product *= h_eval(p, 0.0);

  auto run_term = [](TermEntry& t, const std::function<double()>& fn) {
    try {
      t.value = fn();
      t.ok = std::isfinite(t.value);
      if (!t.ok) t.note = "non-finite value";
    } catch (const std::exception& e) {
      t.ok = false;
      t.value = std::numeric_limits<double>::quiet_NaN();
      t.note = e.what();
    }
  };

  // one-dimensional term
  run_term(rep.one, [&] {
    if (cfg.mode == Mode::Numeric) return one_dim_term(pairs, rep.a_j);
    double v = rep.a_j;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      v *= std::exp(M_PI / cfg.a[i]) * h_eval(pairs[i], 0.0);
    return v;
  });

  // identity term
  run_term(rep.id, [&] {
    if (cfg.mode == Mode::Numeric) return cfg.covolume_constant * identity_contribution(pairs, kinds);
    double v = cfg.covolume_constant;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const int eps = place_epsilon(kinds[i]);
      const double T = h_decay_cutoff(pairs[i]);
      const double mom = integrate([&](double x) { return std::pow(x, 1.0 + eps) * h_eval(pairs[i], x); },
                                   0.0, T, std::min(quad_tolerance(), 1e-11));
      v *= 2.0 * (1.0 + eps) / (std::pow(2.0 - eps, 2.0 * (1.0 - eps)) * std::pow(M_PI, 1.0 + eps)) * mom;
    }
    return v;
  });

  // elliptic term
  run_term(rep.ell, [&] {
    if (cfg.mode == Mode::Rigorous && !cfg.paper_losses)
      return elliptic_term_closed_form(F, J, pairs, cfg.a, cfg);
    double total = 0.0;
    const ArchMode am = cfg.mode == Mode::Numeric ? ArchMode::Exact : ArchMode::Bound;
    for_each_elliptic_class(F, cfg.a, cfg.class_cap, [&](const EllipticClass& cl) {
      ++rep.elliptic_class_count;
      double arch = 1.0;
      for (std::size_t v = 0; v < kinds.size(); ++v) arch *= std::abs(arch_elliptic(pairs[v], cl.arch[v], am));
      if (arch == 0.0) return;
      total += elliptic_global_coefficient(F, J, cl, cfg, cfg.mode) * arch;
    });
    return total;
  });

  // hyperbolic term
  run_term(rep.hyp, [&] { return hyperbolic_term(F, J, pairs, cfg.a, cfg, cfg.mode, &rep.hyperbolic_unit_count); });

  // parabolic term
  run_term(rep.par, [&] {
    double zinf1 = 1.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) zinf1 *= arch_parabolic(pairs[i], kinds[i], false);
    const double logA = std::log(double(J.norm));
    if (cfg.mode == Mode::Rigorous) {
      double zprime_bound = 0.0;
      for (std::size_t w = 0; w < pairs.size(); ++w) {
        double term = arch_parabolic_deriv_bound(pairs[w], kinds[w]);
        for (std::size_t v = 0; v < pairs.size(); ++v)
          if (v != w) term *= arch_parabolic(pairs[v], kinds[v], false);
        zprime_bound += term;
      }
      return (std::abs(zeta.lambda0()) * zinf1 +
              zeta.lambda_minus1() * (zprime_bound + 6.0 * zinf1 * std::max(logA, 0.0))) /
             std::sqrt(double(J.norm));
    }
    double g1 = 1.0, g1p = 0.0;
    for (const auto& jf : J.factors) {
      const double gv = parabolic_local_factor(double(jf.place.q), jf.e, 1.0, false).real();
      const double gvp = parabolic_local_factor(double(jf.place.q), jf.e, 1.0, true).real();
      g1p = g1p * gv + gvp * g1;
      g1 *= gv;
    }
    double zprime = 0.0;
    for (std::size_t w = 0; w < pairs.size(); ++w) {
      double term = arch_parabolic(pairs[w], kinds[w], true);
      for (std::size_t v = 0; v < pairs.size(); ++v)
        if (v != w) term *= arch_parabolic(pairs[v], kinds[v], false);
      zprime += term;
    }
    return zeta.lambda0() * g1 * zinf1 + zeta.lambda_minus1() * (g1 * zprime + g1p * zinf1);
  });

  // Eisenstein term
  run_term(rep.eis, [&] {
    if (cfg.mode == Mode::Numeric)
      return eisenstein_term(zeta, pairs, kinds, dims.exact_product, rep.a_j, TermMode::Numeric);
    return eisenstein_term(zeta, pairs, kinds, dims.divisor_bound, rep.a_j, TermMode::Bound);
  });

  // residual term
  run_term(rep.res, [&] { return residual_term(zeta, pairs, rep.a_j, dims.exact_product); });

  rep.normalizer = std::pow(2.0, F.r1) / (rep.a_j * rep.h0_product);
  if (rep.all_ok()) {
    const double sum = std::abs(rep.one.value) + std::abs(rep.id.value) + std::abs(rep.ell.value) +
                       std::abs(rep.hyp.value) + std::abs(rep.par.value) + std::abs(rep.eis.value) +
                       std::abs(rep.res.value);
    rep.total = rep.normalizer * sum;
    const double logA = std::log(double(J.norm));
    rep.ratio = J.norm > 1 ? rep.total * std::pow(logA, 2.0 * F.r1 + 3.0 * F.r2) / double(J.gamma0_index) : 0.0;
  } else {
    // a failed term is never papered over with a made-up contribution
    rep.total = rep.ratio = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

// ---- sweep -------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_header() {
  return "A,index,a,S_one,S_id,S_ell,S_hyp,S_par,S_Eis,S_Res,total,ratio";
}

inline std::string csv_row(const TraceBoundReport& r) {
  std::string a_str;
  for (std::size_t i = 0; i < r.a.size(); ++i) {
    if (i) a_str += ';';
    a_str += format_double(r.a[i]);
  }
  std::string row = std::to_string(r.ideal_norm) + "," + std::to_string(r.gamma0_index) + "," + a_str;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const TermEntry* t : {&r.one, &r.id, &r.ell, &r.hyp, &r.par, &r.eis, &r.res})
    row += "," + format_double(t->ok ? t->value : nan);
  row += "," + format_double(r.total) + "," + format_double(r.ratio);
  return row;
}

// One report per norm, rows computed in parallel but emitted in input order;
// the output is byte-identical for every thread count.
inline std::vector<TraceBoundReport> sweep(const NumberFieldDescriptor& F,
                                           const std::vector<long long>& norms, const AssemblyConfig& cfg,
                                           int threads = 1,
                                           const std::function<void(const std::string&)>& row_sink = {}) {
  std::vector<std::optional<TraceBoundReport>> slots(norms.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= norms.size()) return;
      try {
        slots[i] = assemble_bound(F, factor_ideal(F, norms[i]), cfg);
      } catch (const std::exception& e) {
        TraceBoundReport bad;
        bad.field_spec = field_spec_string(F);
        bad.ideal_norm = norms[i];
        bad.one.ok = false;
        bad.one.note = e.what();
        slots[i] = bad;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<TraceBoundReport> out;
  out.reserve(norms.size());
  for (auto& s : slots) {
    if (row_sink) row_sink(csv_row(*s));
    out.push_back(std::move(*s));
  }
  return out;
}

// Norm specs: "a..b", "primes:a..b", or a comma list of integers.
inline std::vector<long long> parse_norm_spec(const std::string& spec) {
  auto is_prime = [](long long n) {
    if (n < 2) return false;
    for (long long p = 2; p * p <= n; ++p)
      if (n % p == 0) return false;
    return true;
  };
  std::vector<long long> out;
  std::string body = spec;
  bool primes_only = false;
  if (body.rfind("primes:", 0) == 0) {
    primes_only = true;
    body = body.substr(7);
  }
  const auto dots = body.find("..");
  if (dots != std::string::npos) {
    const long long lo = std::stoll(body.substr(0, dots));
    const long long hi = std::stoll(body.substr(dots + 2));
    for (long long n = lo; n <= hi; ++n)
      if (!primes_only || is_prime(n)) out.push_back(n);
    return out;
  }
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto comma = body.find(',', pos);
    if (comma == std::string::npos) comma = body.size();
    out.push_back(std::stoll(body.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  if (primes_only) std::erase_if(out, [&](long long n) { return !is_prime(n); });
  return out;
}

}  // namespace tracebound
