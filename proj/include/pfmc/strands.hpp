#pragma once

// Role strands: the per-role sequence of send/receive steps derived from the
// action list, with transport-encoded wire patterns, goal event marks and the
// executability check (every sent message must be composable from what the
// role knows, has received, or freshly generates).
//
// Transport encoding of channels onto plain Dolev-Yao terms:
//   A  ->  B : m      wire = m
//   A *->* B : m      wire = {|m|}%chk(A,B)      (mutually authenticated)
//  [A] *->* B : m     wire = {m}%chpub(B)        (sender unauthenticated)
//   A *->* [B] : m    wire = {|m|}%chk(A,B)      (pseudonymous receiver keeps
//                                                 the secure transport)
// %chk/%chpub start with '%' so they can never collide with protocol symbols.
// The attacker owns %chk(i,x), %chk(x,i) for every agent x and inv(%chpub(i)),
// and %chpub itself is public, so it fully controls its own channel endpoints.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfmc/anb.hpp"
#include "pfmc/closure.hpp"

namespace pfmc {

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class StepKind : std::uint8_t { Send, Recv };

struct EventFact {
  enum Kind : std::uint8_t { Running, Commit, SecretClaim };
  Kind kind;
  int goal_index;
  TermPtr actor;     // identity of the strand emitting the event
  TermPtr peer;      // authentication only: actor's view of the other side
  TermPtr payload;
  TermList parties;  // secrecy claims: actor's view of every stated party
};

struct Step {
  StepKind kind;
  int action_index;
  TermPtr payload;  // protocol-level message as this role sees it
  TermPtr wire;     // transport-encoded pattern
  std::vector<EventFact> events;
};

struct Strand {
  std::string role;
  TermPtr agent;  // role variable in templates, concrete atom in instances
  std::vector<Step> steps;
  int session = 0;
  std::size_t next = 0;

  bool done() const { return next >= steps.size(); }
};

// Variable classification inside one role's strand.
struct RoleVars {
  std::vector<std::uint32_t> params;  // appear in the role's initial knowledge
  std::vector<std::uint32_t> fresh;   // first occurrence in one of its sends
  std::vector<std::uint32_t> bound;   // first occurrence in one of its receives
};

namespace strand_detail {

inline TermPtr role_view(const ProtocolSpec& spec, const std::string& name) {
  if (spec.is_var(name)) return mk_var(name, spec.var_index.at(name));
  return mk_atom(name, AtomKind::Agent);
}

inline TermPtr channel_wire(const Action& a, const TermPtr& sender_view,
                            const TermPtr& receiver_view, const TermPtr& payload) {
  if (a.channel == ChannelKind::Plain) return payload;
  if (a.sender_pseudo)
    return mk_asym_enc(mk_apply("%chpub", {receiver_view}), payload);
  return mk_sym_enc(mk_apply("%chk", {sender_view, receiver_view}), payload);
}

}  // namespace strand_detail

inline std::map<std::string, Strand> roles_to_strands(const ProtocolSpec& spec);

// Classifies every variable occurring in a role's strand or knowledge.
inline RoleVars classify_role_vars(const ProtocolSpec& spec, const std::string& role) {
  RoleVars rv;
  std::vector<std::uint32_t> seen;
  auto known = [&](std::uint32_t v, const std::vector<std::uint32_t>& xs) {
    for (auto x : xs)
      if (x == v) return true;
    return false;
  };
  for (const auto& t : spec.knowledge.at(role)) {
    std::vector<std::uint32_t> vs;
    collect_vars(t, vs);
    for (auto v : vs)
      if (!known(v, rv.params)) rv.params.push_back(v);
  }
  for (const auto& a : spec.actions) {
    bool snd = a.sender == role;
    bool rcv = a.receiver == role;
    if (!snd && !rcv) continue;
    std::vector<std::uint32_t> vs;
    collect_vars(a.message, vs);
    for (auto v : vs) {
      if (known(v, rv.params) || known(v, seen)) continue;
      seen.push_back(v);
      (snd ? rv.fresh : rv.bound).push_back(v);
    }
  }
  return rv;
}

inline std::map<std::string, Strand> roles_to_strands(const ProtocolSpec& spec) {
  std::map<std::string, Strand> out;
  std::vector<std::string> acting;
  for (const auto& r : spec.roles) {
    bool acts = false;
    for (const auto& a : spec.actions)
      if (a.sender == r || a.receiver == r) acts = true;
    if (acts) acting.push_back(r);
  }

  for (const auto& role : acting) {
    Strand s;
    s.role = role;
    s.agent = strand_detail::role_view(spec, role);
    for (int ai = 0; ai < static_cast<int>(spec.actions.size()); ++ai) {
      const Action& a = spec.actions[ai];
      if (a.sender == role && a.receiver == role)
        throw ProtocolError("action " + std::to_string(ai + 1) +
                            " has the same sender and receiver");
      if (a.sender != role && a.receiver != role) continue;
      Step st;
      st.kind = a.sender == role ? StepKind::Send : StepKind::Recv;
      st.action_index = ai;
      st.payload = a.message;
      st.wire = strand_detail::channel_wire(
          a, strand_detail::role_view(spec, a.sender),
          strand_detail::role_view(spec, a.receiver), a.message);
      s.steps.push_back(std::move(st));
    }
    out.emplace(role, std::move(s));
  }

  // Executability: walk each strand accumulating the role's analyzed view;
  // every send must be synthesizable from knowledge + received material +
  // the fresh values this role originates.
  for (const auto& role : acting) {
    RoleVars rv = classify_role_vars(spec, role);
    TermList view = spec.knowledge.at(role);
    for (auto v : rv.fresh) {
      // fresh values are available to their originator from the start
      for (const auto& [name, idx] : spec.var_index)
        if (idx == v) view.push_back(mk_var(name, idx));
    }
    TermSet analyzed = analyze_saturate(view);
    for (const Step& st : out.at(role).steps) {
      if (st.kind == StepKind::Recv) {
        view.push_back(st.payload);
        analyzed = analyze_saturate(view);
        continue;
      }
      if (!synth_from(analyzed, st.payload))
        throw ProtocolError("role '" + role + "' cannot compose the message of action " +
                            std::to_string(st.action_index + 1) + ": " +
                            render_bare(st.payload));
    }
  }

  // Goal events. Authentication(A,B,m): B's first send containing m emits
  // running(B, view-of-A, m); A's last step containing m emits
  // commit(A, view-of-B, m). Secrecy(m, parties): each party's last step
  // containing m emits a secret claim. Secure-channel goals combine secrecy
  // with receiver-authenticates-sender.
  auto attach = [&](const std::string& role, bool first, bool sends_only,
                    const TermPtr& payload, const EventFact& ev) {
    auto it = out.find(role);
    if (it == out.end())
      throw ProtocolError("goal references role '" + role + "' which never acts");
    Strand& s = it->second;
    int pos = -1;
    for (int i = 0; i < static_cast<int>(s.steps.size()); ++i) {
      if (sends_only && s.steps[i].kind != StepKind::Send) continue;
      if (!subterm_of(payload, s.steps[i].payload)) continue;
      pos = i;
      if (first) break;
    }
    if (pos < 0)
      throw ProtocolError("goal payload " + render_bare(payload) +
                          " never appears in role '" + role + "'");
    s.steps[pos].events.push_back(ev);
  };
  auto view_in = [&](const std::string& name) {
    return strand_detail::role_view(spec, name);
  };

  for (int gi = 0; gi < static_cast<int>(spec.goals.size()); ++gi) {
    const Goal& g = spec.goals[gi];
    auto auth_events = [&](const std::string& authenticator, const std::string& peer,
                           const TermPtr& payload) {
      EventFact run{EventFact::Running, gi, view_in(peer), view_in(authenticator),
                    payload, {}};
      attach(peer, /*first=*/true, /*sends_only=*/true, payload, run);
      EventFact com{EventFact::Commit, gi, view_in(authenticator), view_in(peer),
                    payload, {}};
      attach(authenticator, /*first=*/false, /*sends_only=*/false, payload, com);
    };
    auto secrecy_events = [&](const std::vector<std::string>& parties,
                              const TermPtr& payload) {
      TermList party_views;
      for (const auto& p : parties) party_views.push_back(view_in(p));
      for (const auto& p : parties) {
        EventFact claim{EventFact::SecretClaim, gi, view_in(p), nullptr, payload,
                        party_views};
        attach(p, /*first=*/false, /*sends_only=*/false, payload, claim);
      }
    };
    switch (g.kind) {
      case Goal::Authentication:
        auth_events(g.a, g.b, g.payload);
        break;
      case Goal::Secrecy:
        secrecy_events(g.parties, g.payload);
        break;
      case Goal::SecureChannel:
        auth_events(/*authenticator=*/g.b, /*peer=*/g.a, g.payload);
        secrecy_events({g.a, g.b}, g.payload);
        break;
    }
  }
  return out;
}

}  // namespace pfmc
