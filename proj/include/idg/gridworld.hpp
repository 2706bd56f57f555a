#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "idg/instance.hpp"

namespace idg {

// Tile coordinate: x is the column from the left, y the row from the top.
// Ordered row-major, (y, x).
struct Coord {
  int x = 0;
  int y = 0;

  friend bool operator==(const Coord&, const Coord&) = default;
  friend auto operator<=>(const Coord& a, const Coord& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

struct GridInstance {
  int width = 0;
  int height = 0;
  Coord start;
  std::set<Coord> goals;
  std::set<Coord> lava;

  friend bool operator==(const GridInstance&, const GridInstance&) = default;
};

// Throws RejectedInput describing the first violated invariant.
void validate(const GridInstance& grid);

// One state per tile (index y * width + x), named "(x,y)". Actions are the
// in-bounds moves among up, right, down, left in that order; lava tiles keep
// their moves as the leader's believed moves.
IdgInstance to_idg(const GridInstance& grid);

StateId tile_state(const GridInstance& grid, Coord c);
Coord state_tile(const GridInstance& grid, StateId s);

// Instance document:
//
//   grid <width> <height>
//   start <x> <y>
//   goal <x> <y>     (repeatable)
//   lava <x> <y>     (repeatable)
//
// `#` starts a comment; lines after the header may come in any order.
GridInstance parse_instance(std::string_view text);
// Canonical form: header, start, goals then lava each sorted by (y, x).
std::string serialize_instance(const GridInstance& grid);

GridInstance generate_random(int width, int height, double lava_density, bool require_safe_path,
                             std::uint64_t seed, int max_attempts = 1000);

// ASCII board as the leader sees it: S start, G goal, @ position, . anything
// else. Lava is never drawn.
std::string render_masked(const GridInstance& grid, Coord position);

// Either document flavour, dispatched on the header keyword.
struct LoadedInstance {
  IdgInstance game;
  std::optional<GridInstance> grid;
  std::string canonical;
  std::string id;
};

LoadedInstance load_instance_document(std::string_view text);
LoadedInstance load_grid(const GridInstance& grid);

}  // namespace idg
