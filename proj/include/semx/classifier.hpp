#pragma once

#include "semx/classifier/dataset.hpp"
#include "semx/classifier/model.hpp"
#include "semx/classifier/training.hpp"
