use super::scalar::{sigmoid, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Identity,
    Tanh,
    Silu,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply<F: Scalar>(self, z: F) -> F {
        match self {
            Activation::Identity => z,
            Activation::Tanh => z.tanh(),
            Activation::Silu => z * sigmoid(z),
            Activation::Sigmoid => sigmoid(z),
        }
    }

    /// Derivative with respect to the pre-activation `z`, given `a = apply(z)`.
    #[inline]
    pub fn derivative<F: Scalar>(self, z: F, a: F) -> F {
        match self {
            Activation::Identity => F::one(),
            Activation::Tanh => F::one() - a * a,
            Activation::Silu => {
                let s = sigmoid(z);
                s * (F::one() + z * (F::one() - s))
            }
            Activation::Sigmoid => a * (F::one() - a),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Tanh => "tanh",
            Activation::Silu => "silu",
            Activation::Sigmoid => "sigmoid",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(Activation::Identity),
            "tanh" => Some(Activation::Tanh),
            "silu" => Some(Activation::Silu),
            "sigmoid" => Some(Activation::Sigmoid),
            _ => None,
        }
    }
}
