#include <algorithm>
#include <cfloat>
#include <cmath>
#include <ostream>
#include <unordered_map>

#include "fiberalign/csv.hpp"
#include "fiberalign/errors.hpp"
#include "fiberalign/fiber.hpp"

namespace fiberalign {

void JoinConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("epsilon must be finite and >= 0");
  }
}

std::string_view to_string(JoinEngine e) noexcept { return e == JoinEngine::grid ? "grid" : "brute"; }

double euclidean_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                          const Eigen::Ref<const Eigen::VectorXd>& b) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

namespace {

void require_same_dim(const PointSet& images, const PointSet& texts) {
  if (images.dim() != texts.dim()) {
    throw DomainError("point sets live in different dimensions: " +
                      std::to_string(images.dim()) + " vs " + std::to_string(texts.dim()));
  }
}

void sort_pairs(std::vector<MatchedPair>& pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const MatchedPair& a, const MatchedPair& b) {
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.text_id < b.text_id;
  });
}

struct CellHash {
  std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (auto v : key) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

using CellMap = std::unordered_map<std::vector<std::int64_t>, std::vector<Eigen::Index>, CellHash>;

// Cell indices beyond this magnitude lose integer precision in a double.
constexpr double kMaxCellIndex = 9.0e15;

bool cell_of(double coord, double eps, std::int64_t& out) {
  const double c = std::floor(coord / eps);
  if (!std::isfinite(c) || std::abs(c) > kMaxCellIndex) return false;
  out = static_cast<std::int64_t>(c);
  return true;
}

}  // namespace

JoinResult join_bruteforce(const PointSet& images, const PointSet& texts, const JoinConfig& cfg) {
  require_same_dim(images, texts);
  cfg.validate();
  JoinResult r;
  r.epsilon = cfg.epsilon;
  r.engine = JoinEngine::brute;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (std::size_t t = 0; t < texts.size(); ++t) {
      const double dist = euclidean_distance(images.coords.col(static_cast<Eigen::Index>(i)),
                                             texts.coords.col(static_cast<Eigen::Index>(t)));
      ++r.distance_evals;
      if (dist <= cfg.epsilon) r.pairs.push_back({images.ids[i], texts.ids[t], dist});
    }
  }
  sort_pairs(r.pairs);
  return r;
}

JoinResult join_grid(const PointSet& images, const PointSet& texts, const JoinConfig& cfg) {
  require_same_dim(images, texts);
  cfg.validate();
  const double eps = cfg.epsilon;
  const std::size_t dim = images.dim();
  if (eps == 0.0 || dim == 0 || dim > kGridMaxDim) return join_bruteforce(images, texts, cfg);

  CellMap cells;
  std::vector<std::int64_t> key(dim);
  for (Eigen::Index t = 0; t < texts.coords.cols(); ++t) {
    for (std::size_t k = 0; k < dim; ++k) {
      if (!cell_of(texts.coords(static_cast<Eigen::Index>(k), t), eps, key[k])) {
        return join_bruteforce(images, texts, cfg);
      }
    }
    cells[key].push_back(t);
  }

  JoinResult r;
  r.epsilon = eps;
  r.engine = JoinEngine::grid;
  std::vector<std::int64_t> lo(dim), hi(dim), cur(dim);
  for (Eigen::Index i = 0; i < images.coords.cols(); ++i) {
    const auto x = images.coords.col(i);
    // Cells overlapping [x - eps, x + eps], widened by a few ulps so a pair
    // that passes the floating-point distance test is never missed. This is
    // the usual 3^d neighbourhood except when x sits on a cell boundary.
    double n_cells = 1.0;
    bool ok = true;
    for (std::size_t k = 0; k < dim && ok; ++k) {
      const double xk = x[static_cast<Eigen::Index>(k)];
      const double slack = 4.0 * DBL_EPSILON * (std::abs(xk) + eps);
      ok = cell_of(xk - eps - slack, eps, lo[k]) && cell_of(xk + eps + slack, eps, hi[k]);
      n_cells *= static_cast<double>(hi[k] - lo[k] + 1);
    }
    if (!ok) return join_bruteforce(images, texts, cfg);

    auto scan = [&](const std::vector<Eigen::Index>& members) {
      for (Eigen::Index t : members) {
        const double dist = euclidean_distance(x, texts.coords.col(t));
        ++r.distance_evals;
        if (dist <= eps) {
          r.pairs.push_back({images.ids[static_cast<std::size_t>(i)],
                             texts.ids[static_cast<std::size_t>(t)], dist});
        }
      }
    };

    if (n_cells > static_cast<double>(cells.size())) {
      // sparse occupancy: cheaper to walk the occupied cells
      for (const auto& [cell, members] : cells) {
        bool inside = true;
        for (std::size_t k = 0; k < dim && inside; ++k) inside = cell[k] >= lo[k] && cell[k] <= hi[k];
        if (inside) scan(members);
      }
      continue;
    }
    cur = lo;
    while (true) {
      if (auto it = cells.find(cur); it != cells.end()) scan(it->second);
      std::size_t k = 0;
      while (k < dim && cur[k] == hi[k]) {
        cur[k] = lo[k];
        ++k;
      }
      if (k == dim) break;
      ++cur[k];
    }
  }
  sort_pairs(r.pairs);
  return r;
}

JoinResult join(const PointSet& images, const PointSet& texts, const JoinConfig& cfg,
                JoinEngine engine) {
  return engine == JoinEngine::grid ? join_grid(images, texts, cfg)
                                    : join_bruteforce(images, texts, cfg);
}

std::size_t empirical_size(const PointSet& images, const PointSet& texts, const JoinConfig& cfg,
                           JoinEngine engine) {
  return join(images, texts, cfg, engine).size();
}

double cross_diameter(const PointSet& images, const PointSet& texts) {
  require_same_dim(images, texts);
  double best = 0.0;
  for (Eigen::Index i = 0; i < images.coords.cols(); ++i) {
    for (Eigen::Index t = 0; t < texts.coords.cols(); ++t) {
      best = std::max(best, euclidean_distance(images.coords.col(i), texts.coords.col(t)));
    }
  }
  return best;
}

bool pairs_included(const JoinResult& inner, const JoinResult& outer) {
  auto by_ids = [](const MatchedPair& a, const MatchedPair& b) {
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.text_id < b.text_id;
  };
  return std::includes(outer.pairs.begin(), outer.pairs.end(), inner.pairs.begin(),
                       inner.pairs.end(), by_ids);
}

void write_join_csv(const JoinResult& r, std::ostream& out) {
  out << "image_id,text_id,distance\n";
  for (const auto& p : r.pairs) {
    out << p.image_id << ',' << p.text_id << ',' << format_double(p.distance) << '\n';
  }
}

}  // namespace fiberalign
