// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dcpgpr/alford.hpp"
#include "dcpgpr/core.hpp"
#include "dcpgpr/dcpd.hpp"
#include "dcpgpr/dcpoe.hpp"
#include "dcpgpr/evaluation.hpp"
#include "dcpgpr/io.hpp"
#include "dcpgpr/preprocess.hpp"
#include "dcpgpr/simulator.hpp"
