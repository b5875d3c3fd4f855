/* Copyright (c) 2026 CrossNet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <string>

#include "crossnet/types.hpp"

namespace crossnet {

/// Reads an 8-bit PNG into a (1|3, h, w) raster scaled to [0,1].
/// Alpha is stripped, palette and 16-bit inputs are converted.
Image load_png(const std::string& path);

/// Writes a (1|3, h, w) raster as an 8-bit PNG, clamping to [0,1].
void save_png(const std::string& path, const Image& img);

}  // namespace crossnet
