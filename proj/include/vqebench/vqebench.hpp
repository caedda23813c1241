/*******************************************************************************
 * Copyright (c) 2025 The vqebench Authors.                                    *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#pragma once
#pragma once

// Everything at once.

#include "vqebench/circuit.hpp"
#include "vqebench/cobyla.hpp"
#include "vqebench/config.hpp"
#include "vqebench/error.hpp"
#include "vqebench/experiment.hpp"
#include "vqebench/goemans_williamson.hpp"
#include "vqebench/graph.hpp"
#include "vqebench/maxcut.hpp"
#include "vqebench/mps.hpp"
#include "vqebench/persistence.hpp"
#include "vqebench/rng.hpp"
#include "vqebench/solvers.hpp"
#include "vqebench/stats.hpp"
