/*
 * Copyright 2026 The stablechaos Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef STABLECHAOS_STABLECHAOS_HPP
#define STABLECHAOS_STABLECHAOS_HPP

#include "stablechaos/coupling.hpp"
#include "stablechaos/distributions.hpp"
#include "stablechaos/error.hpp"
#include "stablechaos/flow.hpp"
#include "stablechaos/limit_system.hpp"
#include "stablechaos/metrics.hpp"
#include "stablechaos/models.hpp"
#include "stablechaos/parallel.hpp"
#include "stablechaos/particle_system.hpp"
#include "stablechaos/rng.hpp"
#include "stablechaos/stable_process.hpp"

#endif  // STABLECHAOS_STABLECHAOS_HPP
