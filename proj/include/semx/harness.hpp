#pragma once

#include "semx/harness/binary_io.hpp"
#include "semx/harness/checkpoint.hpp"
#include "semx/harness/config.hpp"
#include "semx/harness/dataset_io.hpp"
#include "semx/harness/runs.hpp"
