#pragma once
// Umbrella header.

#include "tsl/errors.hpp"
#include "tsl/grid.hpp"
#include "tsl/parallel.hpp"
#include "tsl/fourier.hpp"
#include "tsl/io.hpp"
#include "tsl/kernels.hpp"
#include "tsl/catalog.hpp"
#include "tsl/signals.hpp"
#include "tsl/transform.hpp"
#include "tsl/synthesis.hpp"
#include "tsl/class_estimates.hpp"
#include "tsl/regvar_besov.hpp"
#include "tsl/pde_examples.hpp"
