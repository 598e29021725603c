#pragma once

#include "hitfield/random_instances.hpp"

namespace hitfield::testgen {

using hitfield::Rng;
using gen::grid_for;
using gen::random_d0upup;
using gen::random_kernel;
using gen::random_model;
using gen::random_no_negative_jumps;
using gen::unif;

}  // namespace hitfield::testgen
