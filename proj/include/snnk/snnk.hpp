// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "snnk/activation.hpp"
#include "snnk/arc_cosine.hpp"
#include "snnk/bundling.hpp"
#include "snnk/error.hpp"
#include "snnk/fourier.hpp"
#include "snnk/harness.hpp"
#include "snnk/layer.hpp"
#include "snnk/random.hpp"
#include "snnk/regression.hpp"
#include "snnk/serialize.hpp"
#include "snnk/taylor.hpp"
#include "snnk/train.hpp"
#include "snnk/urf.hpp"
