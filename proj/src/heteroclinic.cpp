#include "melnikov3d/heteroclinic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>

namespace melnikov3d {

std::size_t ContourSet::vertex_count() const {
  std::size_t n = 0;
  for (const auto& c : contours) n += c.vertices.size();
  return n;
}

double zero_snap(const MelnikovField& field) {
  const double peak = field.values.size() ? field.values.cwiseAbs().maxCoeff() : 0.0;
  return std::max(10.0 * field.spec.abs_tol, 1e-12 * peak);
}

namespace {

struct Grid {
  const MelnikovField& f;
  std::size_t np, na;
  double snap;

  explicit Grid(const MelnikovField& field) : f(field), np(field.n_p()), na(field.n_alpha()), snap(zero_snap(field)) {}

  double value(std::size_t i, std::size_t j) const {
    const double v = f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j % na));
    return std::abs(v) <= snap ? 0.0 : v;
  }
  double alpha(std::size_t j) const { return static_cast<double>(j) * f.dalpha(); }
  std::size_t index(std::size_t i, std::size_t j) const { return i * na + (j % na); }
};

// Cell corners c0=(i,j), c1=(i,j+1), c2=(i+1,j+1), c3=(i+1,j); edge k joins c_k and c_{k+1}.
constexpr std::array<std::array<int, 2>, 4> kCorner = {{{0, 0}, {0, 1}, {1, 1}, {1, 0}}};

std::size_t edge_key(const Grid& g, std::size_t i, std::size_t j, int edge) {
  switch (edge) {
    case 0:
      return 2 * g.index(i, j) + 1;  // α-edge on row i
    case 1:
      return 2 * g.index(i, j + 1);  // p-edge on column j+1
    case 2:
      return 2 * g.index(i + 1, j) + 1;
    default:
      return 2 * g.index(i, j);
  }
}

// Sign changes around the eight neighbours of an interior node. Four or more
// means two zero curves cross at this node to grid resolution.
int ring_sign_changes(const Grid& g, std::size_t i, std::size_t j) {
  constexpr std::array<std::array<int, 2>, 8> ring = {{{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
  int changes = 0;
  bool prev = g.value(i + 1, j + g.na - 1) >= 0.0;
  for (const auto& [di, dj] : ring) {
    const bool pos = g.value(i + di, j + g.na + dj) >= 0.0;
    changes += pos != prev;
    prev = pos;
  }
  return changes;
}

ContourVertex make_vertex(const Grid& g, std::size_t key, double grad_threshold, bool at_crossing) {
  const std::size_t node = key / 2;
  const std::size_t i = node / g.na, j = node % g.na;
  const bool p_edge = key % 2 == 0;
  const std::size_t i2 = p_edge ? i + 1 : i;
  const std::size_t j2 = p_edge ? j : (j + 1) % g.na;
  const double va = g.value(i, j), vb = g.value(i2, j2);
  const double s = va == vb ? 0.0 : va / (va - vb);
  ContourVertex v;
  v.node_a = {i, j};
  v.node_b = {i2, j2};
  if (p_edge) {
    v.p = g.f.p[i] + s * (g.f.p[i + 1] - g.f.p[i]);
    v.alpha = g.alpha(j);
  } else {
    v.p = g.f.p[i];
    v.alpha = g.alpha(j) + s * g.f.dalpha();
    if (v.alpha >= 1.0) v.alpha -= 1.0;
  }
  const auto lerp = [&](const Eigen::MatrixXd& m) {
    return (1.0 - s) * m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +
           s * m(static_cast<Eigen::Index>(i2), static_cast<Eigen::Index>(j2));
  };
  v.transverse = !at_crossing && std::abs(lerp(g.f.dMdp)) + std::abs(lerp(g.f.dMdalpha)) > grad_threshold;
  return v;
}

}  // namespace

ContourSet zero_contours(const MelnikovField& field, double grad_threshold) {
  if (field.n_p() < 2 || field.n_alpha() < 2) throw ConfigError("zero_contours: empty field");
  const Grid g(field);
  ContourSet out;
  out.grad_threshold = grad_threshold;
  out.snap = g.snap;

  // Crossing sites: nodes with a four-way sign ring, and saddle cells.
  struct Site {
    double p, alpha;
    std::pair<std::size_t, std::size_t> node;
  };
  std::vector<Site> sites;
  std::vector<long> parent;
  const auto find = [&](long s) {
    while (parent[s] != s) s = parent[s] = parent[parent[s]];
    return s;
  };
  const auto unite = [&](long a, long b) {
    a = find(a), b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };
  std::vector<long> node_site(g.np * g.na, -1);
  for (std::size_t i = 1; i + 1 < g.np; ++i)
    for (std::size_t j = 0; j < g.na; ++j)
      if (ring_sign_changes(g, i, j) >= 4) {
        node_site[g.index(i, j)] = static_cast<long>(sites.size());
        sites.push_back({g.f.p[i], g.alpha(j), {i, j}});
        parent.push_back(static_cast<long>(parent.size()));
      }
  for (std::size_t i = 1; i + 1 < g.np; ++i)
    for (std::size_t j = 0; j < g.na; ++j) {
      const long s = node_site[g.index(i, j)];
      if (s < 0) continue;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const long o = node_site[g.index(i + di, j + g.na + dj)];
          if (o >= 0) unite(s, o);
        }
    }

  std::vector<std::array<std::size_t, 2>> segments;
  std::unordered_map<std::size_t, long> edge_site;
  const auto claim = [&](std::size_t key, long s) {
    auto [it, fresh] = edge_site.emplace(key, s);
    if (!fresh) unite(it->second, s);
  };
  for (std::size_t i = 0; i + 1 < g.np; ++i) {
    for (std::size_t j = 0; j < g.na; ++j) {
      const std::size_t before = segments.size();
      long site = -1;
      for (int k = 0; k < 4; ++k) {
        const long s = node_site[g.index(i + kCorner[k][0], j + kCorner[k][1])];
        if (s < 0) continue;
        if (site < 0) site = s;
        else unite(site, s);
      }
      std::array<double, 4> v{};
      std::array<bool, 4> pos{};
      for (int k = 0; k < 4; ++k) {
        v[k] = g.value(i + kCorner[k][0], j + kCorner[k][1]);
        pos[k] = v[k] >= 0.0;
      }
      std::vector<int> cut;
      for (int k = 0; k < 4; ++k)
        if (pos[k] != pos[(k + 1) % 4]) cut.push_back(k);
      if (cut.size() == 2) {
        segments.push_back({edge_key(g, i, j, cut[0]), edge_key(g, i, j, cut[1])});
      } else if (cut.size() == 4) {
        const bool centre_pos = (v[0] + v[1] + v[2] + v[3]) >= 0.0;
        for (int k = 0; k < 4; ++k) {
          if (pos[k] == centre_pos) continue;
          segments.push_back({edge_key(g, i, j, (k + 3) % 4), edge_key(g, i, j, k)});
        }
        // Saddle of the bilinear interpolant, x along α and y along p.
        const double b = v[1] - v[0], c = v[3] - v[0], d = v[0] - v[1] + v[2] - v[3];
        const double x = d != 0.0 ? std::clamp(-c / d, 0.0, 1.0) : 0.5;
        const double y = d != 0.0 ? std::clamp(-b / d, 0.0, 1.0) : 0.5;
        const long s = static_cast<long>(sites.size());
        sites.push_back({g.f.p[i] + y * (g.f.p[i + 1] - g.f.p[i]), g.alpha(j) + x * g.f.dalpha(), {i, j}});
        parent.push_back(s);
        if (site >= 0) unite(site, s);
        site = s;
      }
      if (site >= 0)
        for (std::size_t s = before; s < segments.size(); ++s)
          for (std::size_t key : segments[s]) claim(key, site);
    }
  }

  // Junctions: one per cluster of sites, at the mean site position.
  std::map<long, long> junction_of_root;
  std::vector<ContourVertex> junctions;
  std::vector<int> members;
  for (std::size_t s = 0; s < sites.size(); ++s) {
    const long r = find(static_cast<long>(s));
    auto [it, fresh] = junction_of_root.emplace(r, static_cast<long>(junctions.size()));
    if (fresh) {
      ContourVertex v;
      v.node_a = v.node_b = sites[r].node;
      v.p = v.alpha = 0.0;
      junctions.push_back(v);
      members.push_back(0);
    }
    ContourVertex& v = junctions[it->second];
    const double a0 = sites[r].alpha, a = sites[s].alpha;
    v.p += sites[s].p;
    v.alpha += a - std::round(a - a0);
    ++members[it->second];
  }
  for (std::size_t k = 0; k < junctions.size(); ++k) {
    junctions[k].p /= members[k];
    junctions[k].alpha /= members[k];
    junctions[k].alpha -= std::floor(junctions[k].alpha);
  }
  const auto junction_at = [&](std::size_t key) -> long {
    const auto it = edge_site.find(key);
    return it == edge_site.end() ? -1 : junction_of_root.at(find(it->second));
  };

  // Raw marching-squares chains and loops as edge-key sequences.
  std::unordered_map<std::size_t, std::vector<std::size_t>> incident;
  for (std::size_t s = 0; s < segments.size(); ++s)
    for (std::size_t key : segments[s]) incident[key].push_back(s);
  std::vector<bool> used(segments.size(), false);
  struct Raw {
    std::vector<std::size_t> keys;
    bool closed;
  };
  std::vector<Raw> raws;
  auto walk = [&](std::size_t start_key, std::size_t first_seg) {
    std::vector<std::size_t> keys{start_key};
    std::size_t key = start_key, seg = first_seg;
    while (true) {
      used[seg] = true;
      key = segments[seg][0] == key ? segments[seg][1] : segments[seg][0];
      keys.push_back(key);
      std::size_t next = segments.size();
      for (std::size_t s : incident[key])
        if (!used[s]) next = s;
      if (next == segments.size()) break;
      seg = next;
    }
    const bool closed = keys.size() > 2 && keys.front() == keys.back();
    if (closed) keys.pop_back();
    raws.push_back({std::move(keys), closed});
  };
  // Open chains first (ends on the p boundary), then loops. Keys are visited
  // in sorted order so the output does not depend on hash ordering.
  std::vector<std::size_t> keys;
  keys.reserve(incident.size());
  for (const auto& kv : incident) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  for (std::size_t key : keys) {
    const auto& segs = incident[key];
    if (segs.size() == 1 && !used[segs[0]]) walk(key, segs[0]);
  }
  for (std::size_t key : keys)
    for (std::size_t s : incident[key])
      if (!used[s]) walk(key, s);

  const auto push_contour = [&](std::vector<ContourVertex> vs, bool closed) {
    Contour c;
    c.id = out.contours.size();
    c.vertices = std::move(vs);
    c.closed = closed;
    out.contours.push_back(std::move(c));
  };

  // Split raw paths at junctions into arcs. Vertices next to a crossing are
  // absorbed into the junction.
  struct Arc {
    std::vector<std::size_t> keys;
    long end[2] = {-1, -1};
  };
  std::vector<Arc> arcs;
  for (Raw& r : raws) {
    std::vector<long> jn(r.keys.size());
    bool any = false;
    for (std::size_t k = 0; k < r.keys.size(); ++k) any |= (jn[k] = junction_at(r.keys[k])) >= 0;
    if (!any) {
      std::vector<ContourVertex> vs;
      for (std::size_t key : r.keys) vs.push_back(make_vertex(g, key, grad_threshold, false));
      push_contour(std::move(vs), r.closed);
      continue;
    }
    if (r.closed) {
      // Start just after a run of junction vertices.
      std::size_t k0 = 0;
      while (jn[k0] < 0) ++k0;
      while (jn[(k0 + 1) % jn.size()] >= 0 && (k0 + 1) % jn.size() != 0) ++k0;
      std::rotate(r.keys.begin(), r.keys.begin() + static_cast<long>(k0), r.keys.end());
      std::rotate(jn.begin(), jn.begin() + static_cast<long>(k0), jn.end());
    }
    Arc cur;
    long last = -1;
    for (std::size_t k = 0; k < r.keys.size(); ++k) {
      if (jn[k] < 0) {
        cur.keys.push_back(r.keys[k]);
        continue;
      }
      if (jn[k] == last && cur.keys.empty()) continue;
      if (last >= 0 || !cur.keys.empty()) {
        cur.end[1] = jn[k];
        arcs.push_back(std::move(cur));
        cur = Arc{};
      }
      cur.end[0] = last = jn[k];
    }
    if (r.closed) {
      cur.end[1] = jn.front();
      if (!cur.keys.empty() || cur.end[0] != cur.end[1]) arcs.push_back(std::move(cur));
    } else if (!cur.keys.empty()) {
      arcs.push_back(std::move(cur));
    }
  }

  // At each junction pair arc ends that leave in the most nearly opposite directions.
  const double dp = g.f.dp(), da = g.f.dalpha();
  const auto direction = [&](const Arc& a, int e) {
    const ContourVertex& J = junctions[a.end[e]];
    double p, alpha;
    if (!a.keys.empty()) {
      const ContourVertex v = make_vertex(g, e == 0 ? a.keys.front() : a.keys.back(), 0.0, false);
      p = v.p, alpha = v.alpha;
    } else {
      p = junctions[a.end[1 - e]].p, alpha = junctions[a.end[1 - e]].alpha;
    }
    const double x = (p - J.p) / dp, dal = alpha - J.alpha, y = (dal - std::round(dal)) / da;
    const double n = std::hypot(x, y);
    return n > 0.0 ? std::array<double, 2>{x / n, y / n} : std::array<double, 2>{0.0, 0.0};
  };
  using End = std::pair<std::size_t, int>;
  std::vector<std::vector<End>> at_junction(junctions.size());
  for (std::size_t a = 0; a < arcs.size(); ++a)
    for (int e = 0; e < 2; ++e)
      if (arcs[a].end[e] >= 0) at_junction[arcs[a].end[e]].push_back({a, e});
  std::map<End, End> partner;
  for (const auto& ends : at_junction) {
    std::vector<std::array<double, 2>> dir;
    for (const End& x : ends) dir.push_back(direction(arcs[x.first], x.second));
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t u = 0; u < ends.size(); ++u)
      for (std::size_t w = u + 1; w < ends.size(); ++w)
        pairs.emplace_back(dir[u][0] * dir[w][0] + dir[u][1] * dir[w][1], u, w);
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> taken(ends.size(), false);
    for (const auto& [cosine, u, w] : pairs) {
      if (taken[u] || taken[w]) continue;
      taken[u] = taken[w] = true;
      partner[ends[u]] = ends[w];
      partner[ends[w]] = ends[u];
    }
  }

  // Trace strokes, straight through each junction.
  std::vector<bool> arc_used(arcs.size(), false);
  const auto junction_vertex = [&](long j) { return junctions[j]; };
  const auto trace = [&](std::size_t a0, int e0, bool closed_mode) {
    std::vector<ContourVertex> vs;
    if (arcs[a0].end[e0] >= 0) vs.push_back(junction_vertex(arcs[a0].end[e0]));
    std::size_t a = a0;
    int e = e0;
    bool closed = false;
    while (true) {
      arc_used[a] = true;
      const auto& ks = arcs[a].keys;
      if (e == 0)
        for (std::size_t key : ks) vs.push_back(make_vertex(g, key, grad_threshold, false));
      else
        for (auto it = ks.rbegin(); it != ks.rend(); ++it) vs.push_back(make_vertex(g, *it, grad_threshold, false));
      const End exit{a, 1 - e};
      if (arcs[a].end[exit.second] < 0) break;
      const auto it = partner.find(exit);
      if (closed_mode && it != partner.end() && it->second == End{a0, e0}) {
        closed = true;
        break;
      }
      vs.push_back(junction_vertex(arcs[a].end[exit.second]));
      if (it == partner.end() || arc_used[it->second.first]) break;
      a = it->second.first;
      e = it->second.second;
    }
    push_contour(std::move(vs), closed);
  };
  for (std::size_t a = 0; a < arcs.size(); ++a)
    for (int e = 0; e < 2; ++e)
      if (!arc_used[a] && (arcs[a].end[e] < 0 || !partner.count({a, e}))) trace(a, e, false);
  for (std::size_t a = 0; a < arcs.size(); ++a)
    if (!arc_used[a]) trace(a, 0, true);
  return out;
}

namespace {

// Crossings are saddles of M with M = 0: Newton on the gradient, central differences.
void refine_junction(ContourVertex& v, const MelnikovField& field, const std::function<double(double, double)>& M,
                     double tol, int max_iter) {
  const double cp = field.dp(), ca = field.dalpha(), hp = 1e-3 * cp, ha = 1e-3 * ca;
  const double p0 = v.p, a0 = v.alpha;
  double p = p0, a = a0;
  for (int it = 0; it < max_iter; ++it) {
    double f[3][3];
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) f[di + 1][dj + 1] = M(p + di * hp, a + dj * ha);
    const double gp = (f[2][1] - f[0][1]) / (2 * hp), ga = (f[1][2] - f[1][0]) / (2 * ha);
    const double hpp = (f[2][1] - 2 * f[1][1] + f[0][1]) / (hp * hp);
    const double haa = (f[1][2] - 2 * f[1][1] + f[1][0]) / (ha * ha);
    const double hpa = (f[2][2] - f[2][0] - f[0][2] + f[0][0]) / (4 * hp * ha);
    const double det = hpp * haa - hpa * hpa;
    if (det == 0.0 || !std::isfinite(det)) return;
    const double sp = (haa * gp - hpa * ga) / det, sa = (hpp * ga - hpa * gp) / det;
    p -= sp;
    a -= sa;
    if (std::abs(p - p0) > cp || std::abs(a - a0) > ca) return;  // left its cell: keep the grid estimate
    if (std::abs(sp) <= tol && std::abs(sa) <= tol) break;
  }
  v.p = p;
  v.alpha = a - std::floor(a);
}

}  // namespace

void refine_contours(ContourSet& contours, const MelnikovField& field,
                     const std::function<double(double, double)>& M, double tol, int max_iter) {
  const Grid g(field);
  for (auto& c : contours.contours) {
    for (auto& v : c.vertices) {
      if (v.node_a == v.node_b) {
        refine_junction(v, field, M, tol, max_iter);
        continue;
      }
      const auto [i, j] = v.node_a;
      const auto [i2, j2] = v.node_b;
      double fa = g.value(i, j), fb = g.value(i2, j2);
      if (fa == 0.0 || fb == 0.0 || (fa > 0.0) == (fb > 0.0)) continue;
      const bool p_edge = i2 != i;
      const double a0 = p_edge ? field.p[i] : g.alpha(j);
      const double h = p_edge ? field.p[i2] - field.p[i] : field.dalpha();
      auto eval = [&](double s) { return p_edge ? M(a0 + s * h, v.alpha) : M(v.p, a0 + s * h); };
      double lo = 0.0, hi = 1.0;
      int side = 0;
      double s = fa / (fa - fb);
      for (int it = 0; it < max_iter && (hi - lo) * std::abs(h) > tol; ++it) {
        s = (lo * fb - hi * fa) / (fb - fa);
        const double fs = eval(s);
        if (fs == 0.0) break;
        if ((fs > 0.0) == (fa > 0.0)) {
          lo = s;
          fa = fs;
          if (side == -1) fb *= 0.5;
          side = -1;
        } else {
          hi = s;
          fb = fs;
          if (side == 1) fa *= 0.5;
          side = 1;
        }
      }
      if (p_edge) {
        v.p = a0 + s * h;
      } else {
        v.alpha = a0 + s * h;
        if (v.alpha >= 1.0) v.alpha -= 1.0;
      }
    }
  }
}

std::vector<LobeReport> lobe_regions(const MelnikovField& field, const ContourSet& contours) {
  const Grid g(field);
  const std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(g.np * g.na, none);
  std::vector<LobeReport> regions;

  for (std::size_t i0 = 0; i0 < g.np; ++i0) {
    for (std::size_t j0 = 0; j0 < g.na; ++j0) {
      if (label[g.index(i0, j0)] != none || g.value(i0, j0) == 0.0) continue;
      LobeReport r;
      r.id = regions.size();
      r.sign = g.value(i0, j0) > 0.0 ? 1 : -1;
      r.t = field.t;
      std::queue<std::pair<std::size_t, std::size_t>> q;
      q.push({i0, j0});
      label[g.index(i0, j0)] = r.id;
      while (!q.empty()) {
        const auto [i, j] = q.front();
        q.pop();
        r.cells.push_back({i, j});
        if (i == 0 || i + 1 == g.np) r.unbounded = true;
        const std::array<std::pair<long, long>, 4> nbrs = {{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
        bool edge_cell = false;
        for (const auto& [di, dj] : nbrs) {
          const long ii = static_cast<long>(i) + di;
          if (ii < 0 || ii >= static_cast<long>(g.np)) continue;
          const std::size_t jj = (j + g.na + static_cast<std::size_t>(dj + 1) - 1) % g.na;
          const double v = g.value(static_cast<std::size_t>(ii), jj);
          const bool same = v != 0.0 && (v > 0.0) == (r.sign > 0);
          if (!same) {
            edge_cell = true;
            continue;
          }
          std::size_t& lab = label[g.index(static_cast<std::size_t>(ii), jj)];
          if (lab == none) {
            lab = r.id;
            q.push({static_cast<std::size_t>(ii), jj});
          }
        }
        if (edge_cell) r.boundary_cells.push_back({i, j});
      }
      std::sort(r.cells.begin(), r.cells.end());
      std::sort(r.boundary_cells.begin(), r.boundary_cells.end());
      regions.push_back(std::move(r));
    }
  }

  for (const auto& c : contours.contours) {
    std::set<std::size_t> touched;
    for (const auto& v : c.vertices) {
      for (const auto& [i, j] : {v.node_a, v.node_b}) {
        const std::size_t lab = label[g.index(i, j)];
        if (lab != none) touched.insert(lab);
        if (g.value(i, j) != 0.0) continue;
        // A zero node borders the regions on both sides of it.
        for (const auto& [di, dj] : {std::pair{-1L, 0L}, {1L, 0L}, {0L, -1L}, {0L, 1L}}) {
          const long ii = static_cast<long>(i) + di;
          if (ii < 0 || ii >= static_cast<long>(g.np)) continue;
          const std::size_t n = label[g.index(static_cast<std::size_t>(ii), (j + g.na + static_cast<std::size_t>(dj + 1) - 1) % g.na)];
          if (n != none) touched.insert(n);
        }
      }
    }
    for (std::size_t lab : touched) regions[lab].boundary_contours.push_back(c.id);
  }
  return regions;
}

namespace {

struct P2 {
  double x, y, w;
};

// ∫ max(w, 0) over a triangle with linear w.
double positive_part_triangle(const std::array<P2, 3>& tri) {
  std::vector<P2> poly;
  for (int k = 0; k < 3; ++k) {
    const P2& a = tri[k];
    const P2& b = tri[(k + 1) % 3];
    if (a.w >= 0.0) poly.push_back(a);
    if ((a.w >= 0.0) != (b.w >= 0.0)) {
      const double s = a.w / (a.w - b.w);
      poly.push_back({a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), 0.0});
    }
  }
  double sum = 0.0;
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    const P2 &a = poly[0], &b = poly[k], &c = poly[k + 1];
    const double area = 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    sum += area * (a.w + b.w + c.w) / 3.0;
  }
  return sum;
}

// ∬ of the positive part of sign·M over cells of a (possibly strided) grid;
// `owner` weights each triangle by the share of its same-signed corners that
// belong to the region (all of them when owner is empty).
double clipped_integral(const Grid& g, std::size_t stride, int sign, const std::vector<std::size_t>* label,
                        std::size_t region) {
  double total = 0.0;
  const std::size_t na = g.na;
  for (std::size_t i = 0; i + stride < g.np; i += stride) {
    for (std::size_t j = 0; j < na; j += stride) {
      std::array<P2, 4> c{};
      std::array<std::size_t, 4> idx{};
      for (int k = 0; k < 4; ++k) {
        const std::size_t ii = i + stride * static_cast<std::size_t>(kCorner[k][0]);
        const std::size_t jj = j + stride * static_cast<std::size_t>(kCorner[k][1]);
        c[k] = {g.f.p[ii], g.alpha(jj), sign * g.value(ii, jj)};
        idx[k] = g.index(ii, jj);
      }
      for (const auto& tri : {std::array<int, 3>{0, 1, 2}, std::array<int, 3>{0, 2, 3}}) {
        double share = 1.0;
        if (label) {
          int mine = 0, same = 0;
          for (int k : tri) {
            if (c[k].w <= 0.0) continue;
            ++same;
            if ((*label)[idx[k]] == region) ++mine;
          }
          if (same == 0 || mine == 0) continue;
          share = static_cast<double>(mine) / same;
        }
        total += share * positive_part_triangle({c[tri[0]], c[tri[1]], c[tri[2]]});
      }
    }
  }
  return total;
}

}  // namespace

double signed_part_integral(const MelnikovField& field, int sign) {
  return clipped_integral(Grid(field), 1, sign > 0 ? 1 : -1, nullptr, 0);
}

LobeReport lobe_volume(const MelnikovField& field, const LobeReport& region, double eps) {
  if (region.unbounded) throw DomainError("lobe_volume: region touches the p boundary of the grid");
  if (!std::isfinite(eps)) throw ConfigError("lobe_volume: eps must be finite");
  const Grid g(field);
  std::vector<std::size_t> label(g.np * g.na, static_cast<std::size_t>(-1));
  for (const auto& [i, j] : region.cells) label[g.index(i, j)] = region.id;

  LobeReport out = region;
  out.eps = eps;
  out.abs_integral = clipped_integral(g, 1, region.sign, &label, region.id);
  out.volume_leading = std::abs(eps) * out.abs_integral;
  if (g.na % 2 == 0 && g.np >= 5) {
    const double coarse = clipped_integral(g, 2, region.sign, &label, region.id);
    out.volume_error_estimate = std::abs(eps) * std::abs(out.abs_integral - coarse) / 3.0;
  } else {
    out.volume_error_estimate = out.volume_leading;
  }
  return out;
}

}  // namespace melnikov3d
