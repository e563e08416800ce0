#pragma once

#include "gradalign/attack_config.hpp"
#include "gradalign/dataset.hpp"
#include "gradalign/losses.hpp"
#include "gradalign/metrics.hpp"
#include "gradalign/model.hpp"
#include "gradalign/query.hpp"
#include "gradalign/tensor.hpp"
#include "gradalign/train.hpp"
#include "gradalign/transfer.hpp"
