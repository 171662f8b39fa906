#pragma once

#include "bounds.hpp"
#include "core.hpp"
#include "counterexamples.hpp"
#include "curves.hpp"
#include "fock.hpp"
#include "io.hpp"
#include "kernels.hpp"
#include "mc.hpp"
#include "norms.hpp"
#include "specfun.hpp"
#include "wick.hpp"
