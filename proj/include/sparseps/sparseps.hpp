// Copyright 2026 The sparseps Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "sparseps/errors.hpp"
#include "sparseps/eval.hpp"
#include "sparseps/geometry.hpp"
#include "sparseps/image_io.hpp"
#include "sparseps/losses.hpp"
#include "sparseps/mlp.hpp"
#include "sparseps/obsmap.hpp"
#include "sparseps/render.hpp"
#include "sparseps/solvers.hpp"
