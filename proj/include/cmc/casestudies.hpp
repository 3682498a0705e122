#pragma once

#include <string>
#include <utility>

#include "cmc/parser.hpp"
#include "cmc/printer.hpp"

namespace cmc {

struct CaseStudy {
  Process system;
  Environment env;
};

namespace detail {

inline const char* const kHospitalDefinitions = R"(
Server(l) :=
  if l = nil then 0 else
  b?(x).
    if x = dr{b,c1} then c1!(hd(l)).Server(tl(l))
    else if x = w{b,c2} then c2!(hd(l)).Server(tl(l))
    else Server(l);

Screen1 := c1?(x).a!(x).Screen1;
Screen2 := c2?(x).a!(x).Screen2;

Doctor(p, l, r) :=
    b!(p).a?(x).After(p, x:l, r)
  + out p.b!(k).Relocate(p, l, r);

Relocate(p, l, r) :=
  if p = dr{b,c1} then in w{b,c2}.b!(w{b,c2}).a?(x).After(w{b,c2}, x:l, r)
  else in dr{b,c1}.b!(dr{b,c1}).a?(x).After(dr{b,c1}, x:l, r);

After(p, l, r) := if tl(r) = nil then 0 else Doctor(p, l, tl(r));
)";

inline const char* const kMallSource = R"(
tree sm(m(client(pda)), n, server)

C' := 0;
P' := 0;
S' := 0;

system
  new port a in new port b in new port c in (
    sm[ m[ client[ ploc(x).a!(x, n).a?(u).u.C'
                 | pda[ a?(y1, y2).b!(y1, y2).c?(z).a!(z).P' ] ] ]
      | n[] ]
    | server[ b?(x1, x2).c!(path(x1, x2)).S' ])
)";

}  // namespace detail

/// Port sets of the waiting room's screen; the default admits c2 and a.
inline std::string hospital_source(const Value& requests, const std::string& screen2_ports = "c2,a") {
  std::string out = detail::kHospitalDefinitions;
  out += "\nHospital(l) :=\n  s[Server(l)]\n";
  out += "  | k[ dr{b,c1}[ d{a,b}[Doctor(dr{b,c1}, nil, l)] | scr1{c1,a}[Screen1] ]\n";
  out += "     | w{b,c2}[ scr2{" + screen2_ports + "}[Screen2] ] ];\n";
  out += "\nsystem Hospital(" + to_string(requests) + ")\n";
  return out;
}

/// The hospital with the server holding `requests`, one result per list element.
inline CaseStudy hospital_system(const Value& requests = Value::list({Value::of_name(AmbientName("v"))}),
                                 const std::string& screen2_ports = "c2,a") {
  SourceFile f = parse_source(hospital_source(requests, screen2_ports));
  return {*f.system, std::move(f.env)};
}

/// The mall with continuations C', P' and S' for the client, its PDA and the server.
inline CaseStudy mall_system(const Process& client_next = zero(), const Process& pda_next = zero(),
                             const Process& server_next = zero()) {
  SourceFile f = parse_source(detail::kMallSource);
  f.env.defs["C'"].body = client_next;
  f.env.defs["P'"].body = pda_next;
  f.env.defs["S'"].body = server_next;
  return {*f.system, std::move(f.env)};
}

}  // namespace cmc
