#pragma once

#include "deepwl/digest.hpp"
#include "deepwl/error.hpp"
#include "deepwl/harness/cfi.hpp"
#include "deepwl/harness/drivers.hpp"
#include "deepwl/harness/fixtures.hpp"
#include "deepwl/harness/programs.hpp"
#include "deepwl/machine.hpp"
#include "deepwl/refine.hpp"
#include "deepwl/sketch.hpp"
#include "deepwl/sketch_ops.hpp"
#include "deepwl/stdlib.hpp"
#include "deepwl/structure.hpp"
#include "deepwl/structure_io.hpp"
#include "deepwl/symbol.hpp"
