#pragma once

#include "slowfast/models.hpp"

namespace slowfast::detail {

double param(const ModelPreset& p, const char* key);

SlowFastSystem build_fhn(const ModelPreset& p);
SlowFastSystem build_neural_field(const ModelPreset& p);
SlowFastSystem build_nonlocal_rd(const ModelPreset& p);
SlowFastSystem build_schnakenberg(const ModelPreset& p);
SlowFastSystem build_dde(const ModelPreset& p);

Vec constant_field(int n, double value);

}  // namespace slowfast::detail
