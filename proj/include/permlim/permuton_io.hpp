#ifndef PERMLIM_PERMUTON_IO_HPP
#define PERMLIM_PERMUTON_IO_HPP

#include "permlim/permuton.hpp"

#include <string>
#include <string_view>

namespace permlim {

/// Strip resolution and tolerance used when validating loaded non-grid permutons.
inline constexpr int kLoadResolution = 1000;
inline constexpr double kLoadTolerance = 1e-9;

/**
 * Parses a permuton description (JSON). Grid inputs are checked exactly,
 * strip by strip; other inputs through marginal_check at kLoadResolution.
 * Invalid input throws std::invalid_argument.
 *
 *   {"type": "grid", "n": 2, "masses": ["0", "1/2", "1/2", "0"]}
 *   {"type": "grid", "masses": [["0", "1/2"], ["1/2", "0"]]}
 *   {"type": "segments", "segments": [[0, 0, 1, 1]], "masses": [1]}   (masses optional)
 *   {"type": "mixture", "components": [{"weight": "1/2", "permuton": {...}}, ...]}
 *   {"type": "perm", "perm": [2, 1]}          (or "2,1")
 *   {"type": "m_set", "a": 0.5}               (or "1/3")
 */
Permuton parse_permuton(std::string_view text);

Permuton load_permuton(const std::string& path);

}  // namespace permlim

#endif
