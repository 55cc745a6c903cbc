#pragma once

// Core analysis headers. Scenario files and reports live in
// charsym/scenario.hpp and charsym/report.hpp, which additionally need
// yaml-cpp and nlohmann/json.

#include "charsym/backgrounds.hpp"
#include "charsym/conventions.hpp"
#include "charsym/errors.hpp"
#include "charsym/geometry.hpp"
#include "charsym/models.hpp"
#include "charsym/rays.hpp"
#include "charsym/sampling.hpp"
#include "charsym/symbol.hpp"
