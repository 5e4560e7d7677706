#pragma once
// Umbrella header for the whole library.

#include "app.hpp"
#include "cartan.hpp"
#include "errors.hpp"
#include "examples.hpp"
#include "fields.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "lie.hpp"
#include "sympl_core.hpp"
