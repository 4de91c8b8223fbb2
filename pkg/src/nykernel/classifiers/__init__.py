"""Fisher discriminant and PCVM classifiers, dense and Nyström-factored."""
from .ikfd import IkfdModel, predict_ikfd, train_ikfd, train_ikfd_dense
from .multiclass import OneVsRestModel, one_vs_rest_predict, one_vs_rest_train
from .pcvm import PcvmModel, predict_pcvm, probit, train_ny_pcvm, train_pcvm_full

__all__ = [
    "IkfdModel", "predict_ikfd", "train_ikfd", "train_ikfd_dense",
    "OneVsRestModel", "one_vs_rest_predict", "one_vs_rest_train",
    "PcvmModel", "predict_pcvm", "probit", "train_ny_pcvm", "train_pcvm_full",
]
