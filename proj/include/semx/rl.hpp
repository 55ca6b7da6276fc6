#pragma once

#include "semx/rl/buffer.hpp"
#include "semx/rl/env.hpp"
#include "semx/rl/gae.hpp"
#include "semx/rl/ppo.hpp"
#include "semx/rl/train.hpp"
