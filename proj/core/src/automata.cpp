#include "hyltl/automata.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "json.hpp"

namespace hyltl {

namespace {

struct Literal {
  std::string name;
  bool negated = false;

  bool matches(const std::string& obs) const {
    return negated ? obs != name : obs == name;
  }
};

bool as_literal(const Formula& f, Literal& out) {
  if (f->op == ltl_op::atom) {
    out = {f->atom, false};
    return true;
  }
  if (f->op == ltl_op::negation && f->lhs->op == ltl_op::atom) {
    out = {f->lhs->atom, true};
    return true;
  }
  return false;
}

// One conjunct compiled to a small machine. States are indices; `step` is a
// total function of (state, observation label); `dead` marks states from
// which acceptance is impossible.
struct Piece {
  int count = 0;
  int accept = -1;
  std::vector<char> dead;
  std::function<int(int, const std::string&)> step;
};

Piece piece_eventually(Literal a) {
  Piece p;
  p.count = 2;
  p.accept = 1;
  p.dead = {0, 0};
  p.step = [a](int s, const std::string& o) {
    if (s == 1) return 1;
    return a.matches(o) ? 1 : 0;
  };
  return p;
}

Piece piece_until(Literal a, Literal b) {
  Piece p;
  p.count = 3;
  p.accept = 1;
  p.dead = {0, 0, 1};
  p.step = [a, b](int s, const std::string& o) {
    if (s != 0) return s;
    if (b.matches(o)) return 1;  // satisfied; the witness need not match a
    return a.matches(o) ? 0 : 2;
  };
  return p;
}

Piece piece_next(Literal a) {
  Piece p;
  p.count = 4;  // before, after one step, accepted, dead
  p.accept = 2;
  p.dead = {0, 0, 0, 1};
  p.step = [a](int s, const std::string& o) {
    if (s == 0) return 1;
    if (s == 1) return a.matches(o) ? 2 : 3;
    return s;
  };
  return p;
}

void collect_conjuncts(const Formula& f, std::vector<Formula>& out) {
  if (f->op == ltl_op::conjunction) {
    collect_conjuncts(f->lhs, out);
    collect_conjuncts(f->rhs, out);
    return;
  }
  out.push_back(f);
}

// The transition behavior of any label outside the declared observations is
// uniform (no positive literal matches, every negated one does), so a single
// virtual label stands for all of them during construction.
const std::string kElse = "!";

}  // namespace

void Fsa::validate() const {
  auto known_state = [&](const std::string& s) {
    return std::find(states.begin(), states.end(), s) != states.end();
  };
  auto known_obs = [&](const std::string& o) {
    return std::find(observations.begin(), observations.end(), o) !=
           observations.end();
  };
  if (!known_state(initial)) raise(errc::bad_config, "initial state is not declared");
  if (!sink.empty() && !known_state(sink))
    raise(errc::bad_config, "sink state is not declared");
  for (const auto& s : accepting)
    if (!known_state(s)) raise(errc::bad_config, "accepting state '" + s + "' is not declared");
  for (const auto& [key, to] : transitions) {
    if (!known_state(key.first) || !known_state(to))
      raise(errc::bad_config, "transition references an undeclared state");
    if (!known_obs(key.second))
      raise(errc::bad_config, "transition references an undeclared observation");
  }
  for (const auto& [from, to] : defaults)
    if (!known_state(from) || !known_state(to))
      raise(errc::bad_config, "default transition references an undeclared state");
}

Fsa build_automaton(const Formula& f) {
  std::vector<Formula> conjuncts;
  collect_conjuncts(f, conjuncts);

  std::vector<Piece> pieces;
  for (const auto& g : conjuncts) {
    Literal a, b;
    if (g->op == ltl_op::eventually && as_literal(g->lhs, a)) {
      pieces.push_back(piece_eventually(a));
    } else if (g->op == ltl_op::until_strong && as_literal(g->lhs, a) &&
               as_literal(g->rhs, b)) {
      pieces.push_back(piece_until(a, b));
    } else if (g->op == ltl_op::next && as_literal(g->lhs, a)) {
      pieces.push_back(piece_next(a));
    } else {
      raise(errc::unsupported_formula,
            "automaton construction supports F a, a U a', X a and conjunctions "
            "of these (a an atom or negated atom); got: " +
                print_formula(g));
    }
  }

  std::vector<std::string> labels = formula_atoms(f);  // sorted, deduped
  std::vector<std::string> bfs_labels = labels;
  bfs_labels.push_back(kElse);

  // Breadth-first product exploration over component state tuples.
  using Key = std::vector<int>;
  std::map<Key, int> ids;
  std::vector<Key> keys;
  std::deque<int> queue;
  auto intern = [&](const Key& k) {
    auto [it, fresh] = ids.emplace(k, static_cast<int>(keys.size()));
    if (fresh) {
      keys.push_back(k);
      queue.push_back(it->second);
    }
    return it->second;
  };
  intern(Key(pieces.size(), 0));
  std::vector<std::vector<int>> succ;  // [state][label index]
  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    const Key key = keys[id];
    if (static_cast<int>(succ.size()) <= id) succ.resize(id + 1);
    succ[id].resize(bfs_labels.size());
    for (std::size_t li = 0; li < bfs_labels.size(); ++li) {
      Key next(pieces.size());
      for (std::size_t pi = 0; pi < pieces.size(); ++pi)
        next[pi] = pieces[pi].step(key[pi], bfs_labels[li]);
      succ[id][li] = intern(next);
    }
  }

  const int n = static_cast<int>(keys.size());
  auto is_accepting = [&](int id) {
    for (std::size_t pi = 0; pi < pieces.size(); ++pi)
      if (keys[id][pi] != pieces[pi].accept) return false;
    return true;
  };
  auto is_dead = [&](int id) {
    for (std::size_t pi = 0; pi < pieces.size(); ++pi)
      if (pieces[pi].dead[keys[id][pi]]) return true;
    return false;
  };

  // A state that cannot reach acceptance behaves as the reject sink.
  std::vector<char> live(n, 0);
  for (int id = 0; id < n; ++id)
    if (is_accepting(id) && !is_dead(id)) live[id] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int id = 0; id < n; ++id) {
      if (live[id] || is_dead(id)) continue;
      for (int t : succ[id])
        if (live[t]) {
          live[id] = 1;
          changed = true;
          break;
        }
    }
  }

  Fsa fsa;
  fsa.observations = labels;
  if (!live[0]) {  // no word is accepted
    fsa.states = {"sink"};
    fsa.initial = "sink";
    fsa.sink = "sink";
    return fsa;
  }

  // Canonical names in breadth-first order over live states: initial s0,
  // accepting s1, the rest s2, s3, ...
  std::vector<int> order;
  std::vector<char> seen(n, 0);
  std::deque<int> bfs{0};
  seen[0] = 1;
  while (!bfs.empty()) {
    const int id = bfs.front();
    bfs.pop_front();
    order.push_back(id);
    for (int t : succ[id])
      if (live[t] && !seen[t]) {
        seen[t] = 1;
        bfs.push_back(t);
      }
  }
  std::size_t accepting_count = 0;
  for (int id : order)
    if (id != 0 && is_accepting(id)) ++accepting_count;
  std::map<int, std::string> name;
  int next_accept = 1;
  int next_plain = 1 + static_cast<int>(std::max<std::size_t>(1, accepting_count));
  for (int id : order) {
    if (id == 0)
      name[id] = "s0";
    else if (is_accepting(id))
      name[id] = "s" + std::to_string(next_accept++);
    else
      name[id] = "s" + std::to_string(next_plain++);
  }

  bool need_sink = false;
  for (int id : order) {
    const std::string& from = name[id];
    for (std::size_t li = 0; li < bfs_labels.size(); ++li) {
      const int t = succ[id][li];
      if (!live[t]) {
        need_sink = true;
        continue;
      }
      if (bfs_labels[li] == kElse)
        fsa.defaults[from] = name[t];
      else
        fsa.transitions[{from, bfs_labels[li]}] = name[t];
    }
    fsa.states.push_back(from);
    if (is_accepting(id)) fsa.accepting.insert(from);
  }
  std::sort(fsa.states.begin(), fsa.states.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  fsa.initial = "s0";
  if (need_sink) {
    fsa.sink = "sink";
    fsa.states.push_back("sink");
  }
  return fsa;
}

std::string fsa_step(const Fsa& fsa, const std::string& state, const std::string& label) {
  if (!fsa.sink.empty() && state == fsa.sink) return fsa.sink;
  const bool declared = std::find(fsa.observations.begin(), fsa.observations.end(),
                                  label) != fsa.observations.end();
  if (!declared && (label.empty() || label[0] != '!'))
    raise(errc::unknown_observation, "observation '" + label + "' is not declared");
  if (declared) {
    auto it = fsa.transitions.find({state, label});
    if (it != fsa.transitions.end()) return it->second;
  } else {
    auto it = fsa.defaults.find(state);
    if (it != fsa.defaults.end()) return it->second;
  }
  if (fsa.sink.empty())
    raise(errc::bad_config, "transition undefined for ('" + state + "', '" + label +
                                "') and the automaton has no sink");
  return fsa.sink;
}

FsaRun run_automaton(const Fsa& fsa, const ObservationWord& word) {
  FsaRun out;
  out.run.reserve(word.size() + 1);
  out.run.push_back(fsa.initial);
  std::string state = fsa.initial;
  for (const auto& label : word) {
    state = fsa_step(fsa, state, label);
    out.run.push_back(state);
  }
  out.accepted = fsa.accepting.count(state) > 0;
  return out;
}

std::string observe(std::span<const double> x, const PropositionSet& props,
                    const std::vector<std::string>& obs_order) {
  if (obs_order.empty())
    raise(errc::unknown_proposition, "observation order is empty");
  for (const auto& name : obs_order)
    if (props.holds(name, x)) return name;
  return "!" + obs_order.front();
}

AugmentedSystem augment_system(const HybridSystem& base, const Fsa& fsa,
                               const PropositionSet& props,
                               const std::vector<std::string>& obs_order) {
  base.validate();
  fsa.validate();
  for (const auto& name : obs_order)
    if (!props.contains(name))
      raise(errc::unknown_proposition, "unknown proposition '" + name + "'");

  AugmentedSystem out;
  out.state_names = fsa.states;
  const std::size_t dim = base.dim;
  const std::size_t n_states = fsa.states.size();
  for (std::size_t i = 0; i < n_states; ++i)
    if (fsa.states[i] == fsa.initial) out.initial_index = i;

  auto state_ok = [n_states](double s) {
    const double r = std::round(s);
    return std::fabs(s - r) <= 1e-9 && r >= 0.0 && r < static_cast<double>(n_states);
  };
  auto lift_pred = [dim](Predicate p) -> Predicate {
    if (!p) return nullptr;
    return [p = std::move(p), dim](std::span<const double> x) {
      return p(x.first(dim));
    };
  };
  auto lift_margin = [dim](ScalarFn m) -> ScalarFn {
    if (!m) return nullptr;
    return [m = std::move(m), dim](std::span<const double> x) {
      return m(x.first(dim));
    };
  };

  HybridSystem& sys = out.system;
  sys.dim = dim + 1;
  sys.flow_set = [p = base.flow_set, dim, state_ok](std::span<const double> x) {
    return state_ok(x[dim]) && p(x.first(dim));
  };
  sys.jump_set = [p = base.jump_set, dim, state_ok](std::span<const double> x) {
    return state_ok(x[dim]) && p(x.first(dim));
  };
  if (base.state_space)
    sys.state_space = [p = base.state_space, dim,
                       state_ok](std::span<const double> x) {
      return state_ok(x[dim]) && p(x.first(dim));
    };
  else
    sys.state_space = [dim, state_ok](std::span<const double> x) {
      return state_ok(x[dim]);
    };
  sys.flow_margin = lift_margin(base.flow_margin);
  sys.jump_margin = lift_margin(base.jump_margin);

  for (const auto& f : base.flow_selections)
    sys.flow_selections.push_back(
        [f, dim](std::span<const double> x, std::span<double> dx) {
          f(x.first(dim), dx.first(dim));
          dx[dim] = 0.0;  // the automaton state is constant along flows
        });

  // Jumps advance the automaton on the observation at the pre-jump state.
  std::vector<std::string> names = fsa.states;
  Fsa fsa_copy = fsa;
  PropositionSet props_copy = props;
  for (const auto& g : base.jump_selections)
    sys.jump_selections.push_back([g, dim, names, fsa_copy, props_copy, obs_order](
                                      std::span<const double> x, std::span<double> nx) {
      g(x.first(dim), nx.first(dim));
      const auto idx = static_cast<std::size_t>(std::llround(x[dim]));
      const std::string next =
          fsa_step(fsa_copy, names[idx], observe(x.first(dim), props_copy, obs_order));
      const auto pos = std::find(names.begin(), names.end(), next) - names.begin();
      nx[dim] = static_cast<double>(pos);
    });

  for (const auto& name : props.names()) {
    if (props.has_margin(name))
      out.props.add(name, lift_pred(props.predicate(name)),
                    lift_margin(props.margin_fn(name)));
    else
      out.props.add(name, lift_pred(props.predicate(name)));
  }
  std::vector<char> accepting_index(n_states, 0);
  for (std::size_t i = 0; i < n_states; ++i)
    if (fsa.accepting.count(fsa.states[i])) accepting_index[i] = 1;
  out.props.add("fsa_accepting",
                [accepting_index, dim, state_ok](std::span<const double> x) {
                  if (!state_ok(x[dim])) return false;
                  return accepting_index[static_cast<std::size_t>(
                             std::llround(x[dim]))] != 0;
                });
  return out;
}

std::string fsa_to_json(const Fsa& fsa) {
  nlohmann::json j;
  j["states"] = fsa.states;
  j["initial"] = fsa.initial;
  j["observations"] = fsa.observations;
  j["accepting"] = std::vector<std::string>(fsa.accepting.begin(), fsa.accepting.end());
  j["sink"] = fsa.sink;
  nlohmann::json tr = nlohmann::json::array();
  for (const auto& [key, to] : fsa.transitions)
    tr.push_back({{"from", key.first}, {"obs", key.second}, {"to", to}});
  j["transitions"] = std::move(tr);
  nlohmann::json def = nlohmann::json::object();
  for (const auto& [from, to] : fsa.defaults) def[from] = to;
  j["defaults"] = std::move(def);
  return j.dump(2) + "\n";
}

Fsa fsa_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) raise(errc::bad_config, "automaton document is not valid JSON");
  Fsa fsa;
  try {
    fsa.states = j.at("states").get<std::vector<std::string>>();
    fsa.initial = j.at("initial").get<std::string>();
    fsa.observations = j.at("observations").get<std::vector<std::string>>();
    for (const auto& s : j.at("accepting")) fsa.accepting.insert(s.get<std::string>());
    fsa.sink = j.value("sink", std::string());
    for (const auto& t : j.at("transitions"))
      fsa.transitions[{t.at("from").get<std::string>(),
                       t.at("obs").get<std::string>()}] = t.at("to").get<std::string>();
    if (j.contains("defaults"))
      for (const auto& [from, to] : j.at("defaults").items())
        fsa.defaults[from] = to.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    raise(errc::bad_config, std::string("bad automaton document: ") + e.what());
  }
  fsa.validate();
  return fsa;
}

std::string fsa_to_dot(const Fsa& fsa) {
  std::ostringstream out;
  out << "digraph fsa {\n  rankdir=LR;\n  node [shape=circle];\n";
  out << "  __start [shape=point];\n";
  for (const auto& s : fsa.accepting)
    out << "  \"" << s << "\" [shape=doublecircle];\n";
  if (!fsa.sink.empty())
    out << "  \"" << fsa.sink << "\" [style=dashed];\n";
  out << "  __start -> \"" << fsa.initial << "\";\n";
  for (const auto& [key, to] : fsa.transitions)
    out << "  \"" << key.first << "\" -> \"" << to << "\" [label=\"" << key.second
        << "\"];\n";
  for (const auto& [from, to] : fsa.defaults)
    out << "  \"" << from << "\" -> \"" << to << "\" [label=\"otherwise\"];\n";
  out << "}\n";
  return out.str();
}

}  // namespace hyltl
