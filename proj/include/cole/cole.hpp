// Copyright 2026 The COLE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "cole/error.hpp"
#include "cole/rng.hpp"
#include "cole/nb201.hpp"
#include "cole/einspace.hpp"
#include "cole/codegen.hpp"
#include "cole/embedding.hpp"
#include "cole/remote_provider.hpp"
#include "cole/pca.hpp"
#include "cole/losses.hpp"
#include "cole/surrogate.hpp"
#include "cole/model_io.hpp"
#include "cole/evaluation.hpp"
#include "cole/oracle.hpp"
#include "cole/search.hpp"
#include "cole/config.hpp"
#include "cole/commands.hpp"
#include "cole/cli.hpp"
