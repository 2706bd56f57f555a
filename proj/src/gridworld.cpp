#include "idg/gridworld.hpp"

#include <sstream>

#include "idg/error.hpp"
#include "idg/rng.hpp"
#include "idg/solver.hpp"
#include "text_util.hpp"

namespace idg {

namespace {

std::string show(Coord c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

bool in_bounds(const GridInstance& g, Coord c) {
  return c.x >= 0 && c.y >= 0 && c.x < g.width && c.y < g.height;
}

struct Direction {
  const char* label;
  int dx;
  int dy;
};

constexpr Direction kDirections[] = {{"up", 0, -1}, {"right", 1, 0}, {"down", 0, 1}, {"left", -1, 0}};

}  // namespace

void validate(const GridInstance& g) {
  if (g.width <= 0 || g.height <= 0) throw RejectedInput("grid dimensions must be positive");
  if (static_cast<long long>(g.width) * g.height < 2) {
    throw RejectedInput("grid must have at least two tiles");
  }
  if (!in_bounds(g, g.start)) throw RejectedInput("start tile " + show(g.start) + " out of bounds");
  if (g.goals.empty()) throw RejectedInput("no goal tile");
  for (Coord c : g.goals) {
    if (!in_bounds(g, c)) throw RejectedInput("goal tile " + show(c) + " out of bounds");
  }
  for (Coord c : g.lava) {
    if (!in_bounds(g, c)) throw RejectedInput("lava tile " + show(c) + " out of bounds");
    if (g.goals.contains(c)) throw RejectedInput("overlapping goal/lava at " + show(c));
  }
  if (g.goals.contains(g.start)) throw RejectedInput("start on goal at " + show(g.start));
  if (g.lava.contains(g.start)) throw RejectedInput("start on lava at " + show(g.start));
}

StateId tile_state(const GridInstance& g, Coord c) {
  if (!in_bounds(g, c)) throw RejectedInput("tile " + show(c) + " out of bounds");
  return StateId{static_cast<std::uint32_t>(c.y * g.width + c.x)};
}

Coord state_tile(const GridInstance& g, StateId s) {
  if (s.value >= static_cast<std::uint32_t>(g.width * g.height)) {
    throw RejectedInput("state index " + std::to_string(s.value) + " is not a tile");
  }
  return Coord{static_cast<int>(s.value) % g.width, static_cast<int>(s.value) / g.width};
}

IdgInstance to_idg(const GridInstance& g) {
  validate(g);
  std::vector<StateSpec> states;
  states.reserve(static_cast<std::size_t>(g.width * g.height));
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const Coord c{x, y};
      StateSpec st;
      st.name = show(c);
      st.kind = g.goals.contains(c)  ? StateClass::Goal
                : g.lava.contains(c) ? StateClass::Harmful
                                     : StateClass::Other;
      if (st.kind != StateClass::Goal) {
        for (const auto& d : kDirections) {
          const Coord n{x + d.dx, y + d.dy};
          if (in_bounds(g, n)) st.moves.push_back(Move{d.label, tile_state(g, n)});
        }
      }
      states.push_back(std::move(st));
    }
  }
  return IdgInstance::build(std::move(states), tile_state(g, g.start));
}

GridInstance parse_instance(std::string_view text) {
  GridInstance g;
  bool header = false;
  bool have_start = false;
  std::size_t start_line = 0;
  detail::for_each_line(text, [&](std::size_t line, const std::vector<detail::Token>& toks) {
    const std::string_view kw = toks[0].text;
    if (!header) {
      if (kw != "grid") throw ParseError(line, toks[0].column, "expected header 'grid <width> <height>'");
      detail::expect_arity(toks, 3, line);
      g.width = static_cast<int>(detail::parse_int(toks[1], line));
      g.height = static_cast<int>(detail::parse_int(toks[2], line));
      if (g.width <= 0) throw ParseError(line, toks[1].column, "width must be positive");
      if (g.height <= 0) throw ParseError(line, toks[2].column, "height must be positive");
      header = true;
      return;
    }
    if (kw != "start" && kw != "goal" && kw != "lava") {
      if (kw == "grid") throw ParseError(line, toks[0].column, "duplicate header");
      throw ParseError(line, toks[0].column, "unknown directive '" + std::string(kw) + "'");
    }
    detail::expect_arity(toks, 3, line);
    const Coord c{static_cast<int>(detail::parse_int(toks[1], line)),
                  static_cast<int>(detail::parse_int(toks[2], line))};
    if (!in_bounds(g, c)) {
      throw ParseError(line, toks[1].column, std::string(kw) + " tile " + show(c) + " out of bounds");
    }
    if (kw == "start") {
      if (have_start) {
        throw ParseError(line, toks[0].column,
                         "duplicate start (first on line " + std::to_string(start_line) + ")");
      }
      have_start = true;
      start_line = line;
      g.start = c;
    } else if (kw == "goal") {
      g.goals.insert(c);
    } else {
      g.lava.insert(c);
    }
  });
  if (!header) throw ParseError(1, 0, "empty document");
  if (!have_start) throw RejectedInput("missing start tile");
  validate(g);
  return g;
}

std::string serialize_instance(const GridInstance& g) {
  std::ostringstream out;
  out << "grid " << g.width << ' ' << g.height << '\n';
  out << "start " << g.start.x << ' ' << g.start.y << '\n';
  for (Coord c : g.goals) out << "goal " << c.x << ' ' << c.y << '\n';
  for (Coord c : g.lava) out << "lava " << c.x << ' ' << c.y << '\n';
  return out.str();
}

GridInstance generate_random(int width, int height, double lava_density, bool require_safe_path,
                             std::uint64_t seed, int max_attempts) {
  if (width <= 0 || height <= 0 || static_cast<long long>(width) * height < 2) {
    throw RejectedInput("random grid needs positive dimensions and at least two tiles");
  }
  if (!(lava_density >= 0.0 && lava_density <= 1.0)) {
    throw RejectedInput("lava density must lie in [0, 1]");
  }
  Rng rng(seed);
  const auto tiles = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  auto at = [&](std::uint64_t i) {
    return Coord{static_cast<int>(i % static_cast<std::uint64_t>(width)),
                 static_cast<int>(i / static_cast<std::uint64_t>(width))};
  };
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    GridInstance g;
    g.width = width;
    g.height = height;
    const std::uint64_t start = rng.below(tiles);
    std::uint64_t goal = rng.below(tiles - 1);
    if (goal >= start) ++goal;
    g.start = at(start);
    g.goals.insert(at(goal));
    for (std::uint64_t i = 0; i < tiles; ++i) {
      if (i == start || i == goal) continue;
      if (rng.bernoulli(lava_density)) g.lava.insert(at(i));
    }
    if (!require_safe_path) return g;
    const IdgInstance game = to_idg(g);
    if (goal_reachable(game, game.start()).reachable) return g;
  }
  std::ostringstream msg;
  msg << "no grid with a safe path after " << max_attempts << " attempts (width=" << width
      << ", height=" << height << ", density=" << lava_density << ", seed=" << seed << ")";
  throw GenerationFailure(msg.str());
}

std::string render_masked(const GridInstance& g, Coord position) {
  std::string out;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const Coord c{x, y};
      char ch = '.';
      if (c == g.start) ch = 'S';
      if (g.goals.contains(c)) ch = 'G';
      if (c == position) ch = '@';
      out += ch;
    }
    out += '\n';
  }
  return out;
}

LoadedInstance load_grid(const GridInstance& grid) {
  LoadedInstance out{to_idg(grid), grid, serialize_instance(grid), {}};
  out.id = instance_fingerprint(out.game);
  return out;
}

LoadedInstance load_instance_document(std::string_view text) {
  std::string_view first;
  detail::for_each_line(text, [&](std::size_t, const std::vector<detail::Token>& toks) {
    if (first.empty()) first = toks[0].text;
  });
  if (first.empty()) throw ParseError(1, 0, "empty document");
  if (first == "grid") return load_grid(parse_instance(text));
  if (first == "idg") {
    IdgInstance game = parse_idg_document(text);
    std::string canonical = serialize_idg_document(game);
    std::string id = instance_fingerprint(game);
    return LoadedInstance{std::move(game), std::nullopt, std::move(canonical), std::move(id)};
  }
  throw ParseError(1, 0, "unknown document type '" + std::string(first) + "' (expected grid or idg)");
}

}  // namespace idg
