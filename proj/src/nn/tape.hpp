#pragma once

#include "octal/nn.hpp"

namespace octal::nn {

struct LayerTape {
  Matrix input;   // h_l
  Matrix agg;     // aggregated input of the first linear map
  Matrix z1;      // GIN only: first linear output
  Matrix n1;      // GIN with inner norm: batch-norm of z1
  Matrix xhat1;   // GIN with inner norm: normalized z1
  Eigen::RowVectorXd inv_std1;
  Matrix r1;      // GIN only: relu of z1 or n1
  Matrix xhat;    // normalized pre-activation
  Eigen::RowVectorXd inv_std;
  Matrix norm;    // batch-norm output, before the relu
};

struct StackTape {
  std::vector<LayerTape> layers;
  Matrix output;
};

struct Tape {
  Mode mode = Mode::Train;
  const Batch* batch = nullptr;
  StackTape main, sys, tree;
  Matrix sys_pooled, tree_pooled;
  Matrix pooled;  // head input
  Matrix mask1, mask2;
  Matrix y1;
  Matrix hidden;  // dropout(relu(y1))
};

}  // namespace octal::nn
