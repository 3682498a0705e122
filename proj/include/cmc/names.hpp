#pragma once

#include <compare>
#include <set>
#include <string>
#include <utility>

namespace cmc {

/// A port `a` or its complement `~a`.
struct PortName {
  std::string base;
  bool co = false;

  PortName complement() const { return {base, !co}; }

  auto operator<=>(const PortName&) const = default;
  bool operator==(const PortName&) const = default;
};

/// The ports an ambient may communicate on. `all` stands for the unannotated `m[P]`.
struct PortSet {
  bool all = true;
  std::set<PortName> members;

  static PortSet everything() { return {}; }
  static PortSet of(std::set<PortName> ports) { return {false, std::move(ports)}; }

  bool contains(const PortName& p) const { return all || members.count(p) > 0; }

  // Global communication on port `base` is admitted iff the plain port is a member.
  bool admits(const std::string& base) const { return contains(PortName{base, false}); }

  auto operator<=>(const PortSet&) const = default;
  bool operator==(const PortSet&) const = default;
};

/// A decorated ambient name m_A. Base and port set together form the identity.
struct AmbientName {
  std::string base;
  PortSet ports;

  AmbientName() = default;
  AmbientName(std::string b, PortSet p = {}) : base(std::move(b)), ports(std::move(p)) {}

  auto operator<=>(const AmbientName&) const = default;
  bool operator==(const AmbientName&) const = default;
};

inline std::string to_string(const PortName& p) { return (p.co ? "~" : "") + p.base; }

inline std::string to_string(const PortSet& s) {
  if (s.all) return "";
  std::string out = "{";
  bool first = true;
  for (const auto& p : s.members) {
    if (!first) out += ",";
    first = false;
    out += to_string(p);
  }
  return out + "}";
}

inline std::string to_string(const AmbientName& n) { return n.base + to_string(n.ports); }

}  // namespace cmc
