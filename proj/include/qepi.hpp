// Copyright 2026 The qepi Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.
#pragma once

#include "qepi/dataio.hpp"
#include "qepi/encode.hpp"
#include "qepi/errors.hpp"
#include "qepi/harness.hpp"
#include "qepi/labels.hpp"
#include "qepi/metrics.hpp"
#include "qepi/optim.hpp"
#include "qepi/prep.hpp"
#include "qepi/qkernel.hpp"
#include "qepi/qstate.hpp"
#include "qepi/rng.hpp"
#include "qepi/svm.hpp"
#include "qepi/types.hpp"
#include "qepi/vqc.hpp"
