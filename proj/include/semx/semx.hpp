#pragma once

#include "semx/classifier.hpp"
#include "semx/harness.hpp"
#include "semx/nn/adam.hpp"
#include "semx/nn/categorical.hpp"
#include "semx/nn/gradcheck.hpp"
#include "semx/nn/loss.hpp"
#include "semx/nn/mlp.hpp"
#include "semx/nn/tensor.hpp"
#include "semx/questions.hpp"
#include "semx/random.hpp"
#include "semx/reward.hpp"
#include "semx/rl.hpp"
#include "semx/task.hpp"
#include "semx/world.hpp"
