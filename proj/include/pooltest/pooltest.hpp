// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pooltest/bounds.hpp"
#include "pooltest/decode.hpp"
#include "pooltest/design.hpp"
#include "pooltest/disguise.hpp"
#include "pooltest/error.hpp"
#include "pooltest/model.hpp"
#include "pooltest/rng.hpp"
#include "pooltest/sim.hpp"
