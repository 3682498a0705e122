#pragma once

// Brute-force first-class transitions of a closed process, computed by locating every active
// prefix in the normal form and instantiating each rule schema on it directly. Nothing here
// goes through the SOS engine; only parsing, normalization, substitution and the value universe
// are shared with the library.

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cmc/congruence.hpp"
#include "cmc/lts.hpp"
#include "cmc/operations.hpp"
#include "cmc/printer.hpp"

namespace oracle {

using namespace cmc;

using Edge = std::pair<std::string, std::string>;  // (label, canonical key of the target)

struct Frame {
  Region region;
  std::size_t part = 0;
  std::size_t summand = 0;
};

// frames[k].region.parts[frames[k].part] is the node entered at depth k; the last one is the located node.
using Loc = std::vector<Frame>;

inline const Process& node_at(const Loc& l, std::size_t k) { return l[k].region.parts[l[k].part]; }

inline bool is_leaf(const Process& p) {
  switch (p->kind) {
    case ProcKind::Cap:
    case ProcKind::Input:
    case ProcKind::Output:
    case ProcKind::Tau:
      return true;
    default:
      return false;
  }
}

class SosOracle {
 public:
  SosOracle(const Process& p, const Environment& env) : env_(env) {
    term_ = normalize(p, env);
    universe_ = ValueUniverse::of(p, env);
    used_ = all_idents(term_);
    Loc prefix;
    collect(open_region(term_), prefix);
  }

  std::set<Edge> edges() {
    for (const auto& l : leaves_) {
      const Process& leaf = node_at(l, l.size() - 1);
      switch (leaf->kind) {
        case ProcKind::Tau:
          emit("tau", replace(l, l.size() - 1, leaf->body()));
          break;
        case ProcKind::Output:
          output_label(l);
          break;
        case ProcKind::Input:
          input_label(l);
          break;
        case ProcKind::Cap:
          capability(l);
          break;
        default:
          break;
      }
    }
    communications();
    return out_;
  }

 private:
  const Environment& env_;
  Process term_;
  ValueUniverse universe_;
  std::set<std::string> used_;
  std::vector<Loc> leaves_;
  std::vector<Loc> ambients_;
  std::set<Edge> out_;

  void collect(const Region& r, Loc& prefix) {
    for (std::size_t i = 0; i < r.parts.size(); ++i) {
      const Process& n = r.parts[i];
      prefix.push_back(Frame{r, i, 0});
      if (is_leaf(n)) leaves_.push_back(prefix);
      if (n->kind == ProcKind::Amb) {
        ambients_.push_back(prefix);
        collect(open_region(n->body()), prefix);
      } else if (n->kind == ProcKind::Relabel) {
        collect(open_region(n->body()), prefix);
      } else if (n->kind == ProcKind::Sum) {
        for (std::size_t s = 0; s < n->kids.size(); ++s) {
          prefix.back().summand = s;
          collect(open_region(n->kids[s]), prefix);
        }
      }
      prefix.pop_back();
    }
  }

  void emit(const std::string& label, const Process& target) { out_.insert({label, canonical(target, env_).key}); }

  // ----- rebuilding -------------------------------------------------------------

  static Process with_part(Region r, std::size_t i, Process p) {
    r.parts[i] = std::move(p);
    return assemble(r);
  }

  // The node at depth k rebuilt around new content for the region below it. Sums collapse to
  // the summand that acted.
  static Process wrap(const Loc& l, std::size_t k, Process content) {
    const Process& n = node_at(l, k);
    switch (n->kind) {
      case ProcKind::Amb:
        return amb(n->amb, content);
      case ProcKind::Relabel:
        return relabel(content, n->relabel);
      default:
        return content;
    }
  }

  // New node for depth k with the located node replaced by `leaf`.
  static Process down(const Loc& l, std::size_t k, const Process& leaf) {
    if (k + 1 == l.size()) return leaf;
    return wrap(l, k, with_part(l[k + 1].region, l[k + 1].part, down(l, k + 1, leaf)));
  }

  // Whole term with the node at depth k replaced by `node`.
  static Process replace_node(const Loc& l, std::size_t k, Process node) {
    Process content = with_part(l[k].region, l[k].part, std::move(node));
    for (std::size_t j = k; j-- > 0;) content = with_part(l[j].region, l[j].part, wrap(l, j, content));
    return content;
  }

  static Process replace(const Loc& l, std::size_t k, const Process& leaf) { return replace_node(l, k, down(l, k, leaf)); }

  static bool is_amb_layer(const Loc& l, std::size_t k) { return node_at(l, k)->kind == ProcKind::Amb; }

  // Nearest depth < below whose node is an ambient.
  static std::optional<std::size_t> enclosing_amb(const Loc& l, std::size_t below) {
    for (std::size_t j = below; j-- > 0;)
      if (is_amb_layer(l, j)) return j;
    return std::nullopt;
  }

  static bool binds_name(const Loc& l, std::size_t from, std::size_t to, const AmbientName& n) {
    for (std::size_t k = from; k <= to && k < l.size(); ++k)
      for (const auto& b : l[k].region.binders)
        if (b.is_port ? n.ports.members.count(PortName{b.port, false}) || n.ports.members.count(PortName{b.port, true})
                      : b.amb == n)
          return true;
    return false;
  }

  static Process restrict_all(const std::vector<Binder>& bs, Process p) {
    for (auto it = bs.rbegin(); it != bs.rend(); ++it)
      p = it->is_port ? restrict_port(it->port, p) : restrict(it->amb, p);
    return p;
  }

  Binder freshen(const Binder& b, std::vector<Process*> in) {
    std::string f = fresh_ident(b.base(), used_);
    used_.insert(f);
    Binder nb = b;
    if (b.is_port) {
      nb.port = f;
      for (auto* p : in) *p = rename_port(*p, b.port, f);
    } else {
      nb.amb = AmbientName(f, b.amb.ports);
      for (auto* p : in) *p = rename_ambient(*p, b.amb, nb.amb);
    }
    return nb;
  }

  struct Extracted {
    Process moved;                // the node, wrapped in the relabellings it sat under
    Process residue;              // replacement for the part at depth k
    std::vector<Binder> lifted;   // binders of the regions below depth k, renamed fresh
  };

  // Binders of `r` that the moved node mentions go along with it (renamed fresh); the others
  // stay with what is left behind.
  Process lift_private(Region& r, Extracted& e) {
    std::vector<Binder> kept;
    for (const auto& b : r.binders) {
      FreeNames fn = free_names(e.moved);
      bool mentioned = b.is_port ? fn.ports.count(b.port) > 0 : fn.ambients.count(b.amb) > 0;
      if (!mentioned) {
        kept.push_back(b);
        continue;
      }
      std::vector<Process*> scope{&e.moved};
      for (auto& p : r.parts) scope.push_back(&p);
      e.lifted.push_back(freshen(b, scope));
    }
    return restrict_all(kept, par(r.parts));
  }

  // Takes the node at depth j (replaced by `bottom`) out of the part at depth k; the layers
  // k..j-1 are relabellings and sums.
  Extracted extract(const Loc& l, std::size_t k, std::size_t j, Process bottom) {
    Extracted e{std::move(bottom), zero(), {}};
    if (j == k) return e;
    Region cur = l[j].region;
    cur.parts.erase(cur.parts.begin() + static_cast<std::ptrdiff_t>(l[j].part));
    for (std::size_t level = j; level > k; --level) {
      Process res = lift_private(cur, e);
      const Process& layer = node_at(l, level - 1);
      if (layer->kind == ProcKind::Relabel) {
        res = relabel(res, layer->relabel);
        e.moved = relabel(e.moved, layer->relabel);
      }
      if (level - 1 == k) {
        e.residue = res;
      } else {
        cur = l[level - 1].region;
        cur.parts[l[level - 1].part] = res;
      }
    }
    return e;
  }

  // Ambients reachable from part `part` of the region at depth k without entering an ambient.
  std::vector<Loc> ambients_near(const Loc& anchor, std::size_t k) const {
    std::vector<Loc> out;
    for (const auto& a : ambients_) {
      if (a.size() <= k) continue;
      bool same = true;
      for (std::size_t i = 0; i < k && same; ++i)
        same = a[i].part == anchor[i].part && a[i].summand == anchor[i].summand;
      if (!same || a[k].part == anchor[k].part) continue;
      bool flat = true;
      for (std::size_t i = k; i + 1 < a.size() && flat; ++i) flat = !is_amb_layer(a, i);
      if (flat) out.push_back(a);
    }
    return out;
  }

  // ----- first-class labels ----------------------------------------------------

  // The port an action is visible on at depth `stop`, or nothing when a restriction or port set blocks it.
  // Binders of the region at depth `stop` count only for labels leaving the whole term.
  static std::optional<std::string> visible_port(const Loc& l, std::size_t stop, std::string port,
                                                 const std::optional<Value>& value, bool at_top) {
    FreeNames fv = value ? free_names(*value) : FreeNames{};
    for (std::size_t k = l.size(); k-- > stop;) {
      for (const auto& b : l[k].region.binders) {
        if (k == stop && !at_top) break;
        if (b.is_port && b.port == port) return std::nullopt;
        if (!b.is_port && fv.ambients.count(b.amb)) return std::nullopt;
        if (b.is_port && fv.ports.count(b.port)) return std::nullopt;
      }
      if (k == stop) break;
      const Process& layer = node_at(l, k - 1);
      if (layer->kind == ProcKind::Amb && !layer->amb.ports.admits(port)) return std::nullopt;
      if (layer->kind == ProcKind::Relabel) port = layer->relabel.apply(port);
    }
    return port;
  }

  void output_label(const Loc& l) {
    const Process& leaf = node_at(l, l.size() - 1);
    auto port = visible_port(l, 0, leaf->ident, leaf->values[0], true);
    if (port) emit(*port + "!(" + to_string(leaf->values[0]) + ")", replace(l, l.size() - 1, leaf->body()));
  }

  void input_label(const Loc& l) {
    const Process& leaf = node_at(l, l.size() - 1);
    auto port = visible_port(l, 0, leaf->ident, std::nullopt, true);
    if (!port) return;
    Process open = replace(l, l.size() - 1, leaf->body());
    for (const auto& v : universe_.values) {
      auto vals = match_pattern(leaf->vars, v);
      if (!vals) continue;
      try {
        emit(*port + "?(" + to_string(v) + ")", substitute_all(open, leaf->vars, *vals));
      } catch (const TypeMismatch&) {
      }
    }
  }

  void communications() {
    for (const auto& o : leaves_) {
      const Process& out = node_at(o, o.size() - 1);
      if (out->kind != ProcKind::Output) continue;
      for (const auto& i : leaves_) {
        const Process& in = node_at(i, i.size() - 1);
        if (in->kind != ProcKind::Input) continue;
        std::size_t k = 0;
        while (k < o.size() && k < i.size() && o[k].part == i[k].part && o[k].summand == i[k].summand) ++k;
        if (k >= o.size() || k >= i.size() || o[k].part == i[k].part) continue;
        auto po = visible_port(o, k, out->ident, out->values[0], false);
        auto pi = visible_port(i, k, in->ident, std::nullopt, false);
        if (!po || !pi || *po != *pi) continue;
        auto vals = match_pattern(in->vars, out->values[0]);
        if (!vals) continue;
        Process received;
        try {
          received = substitute_all(down(i, k, in->body()), in->vars, *vals);
        } catch (const TypeMismatch&) {
          continue;
        }
        Region r = o[k].region;
        r.parts[o[k].part] = down(o, k, out->body());
        r.parts[i[k].part] = received;
        emit("tau", lift(o, k, assemble(r)));
      }
    }
  }

  static Process lift(const Loc& l, std::size_t k, Process content) {
    for (std::size_t j = k; j-- > 0;) content = with_part(l[j].region, l[j].part, wrap(l, j, content));
    return content;
  }

  // ----- capabilities -----------------------------------------------------------

  void capability(const Loc& l) {
    const Process& leaf = node_at(l, l.size() - 1);
    const Capability& c = leaf->cap;
    const std::size_t d = l.size() - 1;
    using CK = Capability::Kind;
    const bool named = (c.kind == CK::In || c.kind == CK::Out) && c.var.empty();
    auto holder = enclosing_amb(l, d);

    if (named && !holder && !binds_name(l, 0, d, c.target))
      emit((c.kind == CK::In ? "in " : "out ") + to_string(c.target), replace(l, d, leaf->body()));
    if (!holder) return;
    const std::size_t j = *holder;

    if (c.kind == CK::In && named) enter(l, j, c.target);
    if (c.kind == CK::Out && named) exit(l, j, c.target);
    if (c.kind == CK::Ploc) parent_name(l, j);
    if (c.kind == CK::Sloc) sibling_name(l, j);
  }

  // m[in n.P | Q] | n[R] -> n[m[P | Q] | R]
  void enter(const Loc& l, std::size_t j, const AmbientName& n) {
    const std::size_t d = l.size() - 1;
    if (binds_name(l, j + 1, d, n)) return;
    const Process& leaf = node_at(l, d);
    for (std::size_t k = j + 1; k-- > 0;) {
      if (k < j && is_amb_layer(l, k)) break;
      if (binds_name(l, k + 1, j, n)) continue;
      for (const auto& host : ambients_near(l, k)) {
        const std::size_t dh = host.size() - 1;
        if (node_at(host, dh)->amb != n || binds_name(host, k + 1, dh, n)) continue;
        Extracted mover = extract(l, k, j, down(l, j, leaf->body()));
        Extracted target = extract(host, k, dh, node_at(host, dh));
        std::vector<RelabelMap> maps;
        Process h = target.moved;
        while (h->kind == ProcKind::Relabel) {
          maps.push_back(h->relabel);
          h = h->body();
        }
        Process body = h->body();
        for (const auto& f : maps) body = relabel(body, f);
        Region r = l[k].region;
        r.parts[l[k].part] = mover.residue;
        r.parts[host[k].part] = target.residue;
        r.parts.push_back(amb(n, par(mover.moved, body)));
        r.binders.insert(r.binders.end(), mover.lifted.begin(), mover.lifted.end());
        r.binders.insert(r.binders.end(), target.lifted.begin(), target.lifted.end());
        emit("tau", lift(l, k, assemble(r)));
      }
    }
  }

  // m[k[out m.P | Q] | R] -> k[P | Q] | m[R]
  void exit(const Loc& l, std::size_t j, const AmbientName& m) {
    const std::size_t d = l.size() - 1;
    if (binds_name(l, j + 1, d, m)) return;
    auto parent = enclosing_amb(l, j);
    if (!parent || node_at(l, *parent)->amb != m) return;
    const std::size_t a = *parent;
    if (binds_name(l, a + 1, j, m)) return;
    Extracted e = extract(l, a + 1, j, down(l, j, node_at(l, d)->body()));
    Region inside = l[a + 1].region;
    inside.parts[l[a + 1].part] = e.residue;
    Process rest = lift_private(inside, e);
    Process moved_out = restrict_all(e.lifted, par(e.moved, amb(m, rest)));
    emit("tau", replace_node(l, a, moved_out));
  }

  // m[k[ploc(x).P | Q] | R] -> m[k[P{x<-m} | Q] | R]
  void parent_name(const Loc& l, std::size_t j) {
    auto parent = enclosing_amb(l, j);
    if (!parent) return;
    const std::size_t a = *parent, d = l.size() - 1;
    const Process& leaf = node_at(l, d);
    try {
      Process cont = substitute(leaf->body(), leaf->cap.var, Value::var("$o"));
      Process m = down(l, a, cont);
      Process body = substitute(m->body(), "$o", Value::of_name(m->amb));
      emit("tau", replace_node(l, a, amb(m->amb, body)));
    } catch (const TypeMismatch&) {
    }
  }

  // k[sloc(x).P] | m[R] -> k[P{x<-m}] | m[R]
  void sibling_name(const Loc& l, std::size_t j) {
    const std::size_t d = l.size() - 1;
    const Process& leaf = node_at(l, d);
    for (std::size_t k = j + 1; k-- > 0;) {
      if (k < j && is_amb_layer(l, k)) break;
      for (const auto& sib : ambients_near(l, k)) {
        const std::size_t ds = sib.size() - 1;
        const AmbientName& s = node_at(sib, ds)->amb;
        if (binds_name(sib, k + 1, ds, s)) continue;
        try {
          Process cont = substitute(leaf->body(), leaf->cap.var, Value::var("$o"));
          Process part = substitute(down(l, k, cont), "$o", Value::of_name(s));
          emit("tau", replace_node(l, k, part));
        } catch (const TypeMismatch&) {
        }
      }
    }
  }
};

inline std::set<Edge> transitions(const Process& p, const Environment& env) { return SosOracle(p, env).edges(); }

}  // namespace oracle
