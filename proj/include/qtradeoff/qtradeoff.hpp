// qtradeoff.hpp
// Umbrella header.

#pragma once

#include "qtradeoff/qmat.hpp"
#include "qtradeoff/states.hpp"
#include "qtradeoff/measures.hpp"
#include "qtradeoff/bound.hpp"
#include "qtradeoff/tomo.hpp"
#include "qtradeoff/verify.hpp"
#include "qtradeoff/commands.hpp"
