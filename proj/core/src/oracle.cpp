#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "mmsa/error.hpp"
#include "mmsa/sensitivity.hpp"

namespace mmsa {

namespace {

// Candidate count ceiling; keeps a single request bounded in time and memory.
constexpr double kMaxCandidates = 5e7;

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// All compositions of m into `parts` positive integers, lexicographic.
void compositions(std::size_t m, std::size_t parts, std::vector<std::size_t>& cur,
                  std::vector<std::vector<std::size_t>>& out) {
  if (parts == 1) {
    cur.push_back(m);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (std::size_t first = 1; first + (parts - 1) <= m; ++first) {
    cur.push_back(first);
    compositions(m - first, parts - 1, cur, out);
    cur.pop_back();
  }
}

struct TouchedAtom {
  double f_weight;  // product of untouched-block factors
  double p;         // P(y)
  std::vector<std::size_t> slots;  // positions in the covaried vector
};

struct Search {
  std::vector<Index> covaried;
  std::vector<double> base;  // covaried values with targets placed
  std::vector<TouchedAtom> atoms;
  // Per touched block: covaried slots of the free parameters and the grid
  // points over them (row-major, free.size() values per point).
  std::vector<std::vector<std::size_t>> free_slots;
  std::vector<std::vector<double>> points;
  std::vector<std::size_t> counts;

  double kl(const std::vector<double>& c) const {
    double d = 0.0;
    for (const auto& a : atoms) {
      double q = a.f_weight;
      for (std::size_t s : a.slots) q *= c[s];
      d += q * std::log(q / a.p);
    }
    return d;
  }

  void decode(std::size_t idx, std::vector<double>& c) const {
    c = base;
    for (std::size_t b = counts.size(); b-- > 0;) {
      const std::size_t i = idx % counts[b];
      idx /= counts[b];
      const std::size_t w = free_slots[b].size();
      for (std::size_t k = 0; k < w; ++k) c[free_slots[b][k]] = points[b][i * w + k];
    }
  }
};

struct Best {
  double kl = std::numeric_limits<double>::infinity();
  std::vector<double> coords;
};

bool better(double kl, const std::vector<double>& c, const Best& b) {
  if (kl != b.kl) return kl < b.kl;
  return std::lexicographical_compare(c.begin(), c.end(), b.coords.begin(), b.coords.end());
}

}  // namespace

std::size_t oracle_free_dimensions(const SimplexPartition& partition, const TargetMap& targets) {
  std::vector<Index> varied;
  for (const auto& [p, _] : targets) varied.push_back(p);
  const IndexGeometry g = index_geometry(partition, varied);
  std::size_t dims = 0;
  for (std::size_t i = 0; i < g.touched_blocks.size(); ++i) {
    const std::size_t n_free = partition.block(g.touched_blocks[i]).size() - g.varied_in_block[i].size();
    if (n_free > 0) dims += n_free - 1;
  }
  return dims;
}

ProjectionResult i_projection_oracle(const MonomialModel& model, const ParameterVector& theta,
                                     const TargetMap& targets, std::size_t grid_m,
                                     unsigned threads) {
  if (model.n_params() != theta.size()) {
    throw Error(ErrorCode::ShapeMismatch, "parameter vector does not match the model");
  }
  if (!model.is_multilinear()) {
    throw Error(ErrorCode::NonMultilinear, "the projection oracle requires a multilinear model");
  }
  if (grid_m < kOracleMinGrid) {
    throw Error(ErrorCode::GridTooCoarse, "oracle grid must be at least " +
                                              std::to_string(kOracleMinGrid) + ", got " +
                                              std::to_string(grid_m));
  }
  theta.require_valid();
  const SimplexPartition& part = theta.partition();
  const VariationSpec spec(part, targets, Scheme::Proportional);
  const std::size_t dims = oracle_free_dimensions(part, targets);
  if (dims > kOracleMaxFreeDimensions) {
    throw Error(ErrorCode::DimensionTooLarge,
                "oracle search has " + std::to_string(dims) + " free dimensions; at most " +
                    std::to_string(kOracleMaxFreeDimensions) + " are supported");
  }
  const ParameterVector prop = proportional_covariation(theta, targets);
  const IndexGeometry g = index_geometry(part, spec.varied());

  Search s;
  s.covaried = g.covaried;
  auto slot_of = [&](Index p) {
    return static_cast<std::size_t>(
        std::lower_bound(s.covaried.begin(), s.covaried.end(), p) - s.covaried.begin());
  };
  for (Index p : s.covaried) {
    auto it = targets.find(p);
    s.base.push_back(it == targets.end() ? theta[p] : it->second);
  }
  for (Index y = 0; y < model.n_atoms(); ++y) {
    TouchedAtom a{1.0, 0.0, {}};
    double p = 1.0;
    for (const auto& t : model.matrix().row(y)) {
      p *= theta[t.param];
      if (g.is_covaried(t.param)) {
        a.slots.push_back(slot_of(t.param));
      } else {
        a.f_weight *= theta[t.param];
      }
    }
    if (a.slots.empty()) continue;
    a.p = p;
    s.atoms.push_back(std::move(a));
  }

  ProjectionResult result{prop, 0.0, 0.0, 0.0, {}, false, dims, 0};
  double total = 1.0;
  std::vector<double> masses;
  for (std::size_t i = 0; i < g.touched_blocks.size(); ++i) {
    std::vector<std::size_t> free;
    double mass = 1.0;
    for (Index p : part.block(g.touched_blocks[i])) {
      if (g.is_varied(p)) {
        mass -= targets.at(p);
      } else {
        free.push_back(slot_of(p));
      }
    }
    masses.push_back(mass);
    const double step = mass / static_cast<double>(grid_m);
    result.block_steps.push_back(step);
    result.grid_step = std::max(result.grid_step, step);
    total *= binomial(grid_m - 1, free.size() - 1);
    s.free_slots.push_back(std::move(free));
  }
  if (total > kMaxCandidates) {
    throw Error(ErrorCode::DimensionTooLarge,
                "oracle grid would evaluate " + std::to_string(static_cast<long long>(total)) +
                    " candidates; lower the grid resolution");
  }
  for (std::size_t b = 0; b < s.free_slots.size(); ++b) {
    const std::size_t w = s.free_slots[b].size();
    std::vector<std::vector<std::size_t>> comps;
    std::vector<std::size_t> cur;
    if (w == 1) {
      comps.push_back({grid_m});
    } else {
      compositions(grid_m, w, cur, comps);
    }
    std::vector<double> pts;
    pts.reserve(comps.size() * w);
    for (const auto& c : comps) {
      // The last coordinate takes the exact remainder so each point sums
      // to the block mass.
      double rest = masses[b];
      for (std::size_t k = 0; k + 1 < w; ++k) {
        pts.push_back(static_cast<double>(c[k]) * result.block_steps[b]);
        rest -= pts.back();
      }
      pts.push_back(rest);
    }
    s.counts.push_back(comps.size());
    s.points.push_back(std::move(pts));
  }
  std::size_t n = 1;
  for (std::size_t c : s.counts) n *= c;

  unsigned nt = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  nt = static_cast<unsigned>(std::min<std::size_t>(nt, std::max<std::size_t>(1, n / 1024)));
  std::vector<Best> local(nt);
  auto work = [&](unsigned t) {
    const std::size_t lo = n * t / nt;
    const std::size_t hi = n * (t + 1) / nt;
    std::vector<double> c;
    for (std::size_t idx = lo; idx < hi; ++idx) {
      s.decode(idx, c);
      const double d = s.kl(c);
      if (better(d, c, local[t])) {
        local[t].kl = d;
        local[t].coords = c;
      }
    }
  };
  if (nt == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }

  Best best;
  for (const auto& l : local) {
    if (!l.coords.empty() && better(l.kl, l.coords, best)) best = l;
  }
  std::vector<double> prop_coords;
  for (Index p : s.covaried) prop_coords.push_back(prop[p]);
  result.proportional_kl = s.kl(prop_coords);
  if (better(result.proportional_kl, prop_coords, best)) {
    best.kl = result.proportional_kl;
    best.coords = prop_coords;
  }
  result.candidates = n + 1;
  // The other schemes land on the same slice; include them so the search
  // never reports a minimum above a point they reach.
  for (Scheme alt : {Scheme::Uniform, Scheme::OrderPreserving}) {
    std::vector<double> coords;
    try {
      const ParameterVector t = covary(theta, VariationSpec(part, targets, alt)).theta_new;
      for (Index p : s.covaried) coords.push_back(t[p]);
    } catch (const Error&) {
      continue;
    }
    const double d = s.kl(coords);
    ++result.candidates;
    if (better(d, coords, best)) {
      best.kl = d;
      best.coords = std::move(coords);
    }
  }
  result.min_kl = best.kl;

  std::vector<double> values = theta.values();
  for (std::size_t i = 0; i < s.covaried.size(); ++i) values[s.covaried[i]] = best.coords[i];
  result.argmin_theta = theta.with_values(std::move(values));

  result.matches_proportional = true;
  for (std::size_t b = 0; b < s.free_slots.size(); ++b) {
    for (std::size_t slot : s.free_slots[b]) {
      if (std::abs(best.coords[slot] - prop_coords[slot]) > result.block_steps[b] + 1e-12) {
        result.matches_proportional = false;
      }
    }
  }
  return result;
}

}  // namespace mmsa
