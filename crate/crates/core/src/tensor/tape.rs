use super::Tensor;

/// What one layer saved during a taped forward pass.
#[derive(Clone, Debug)]
pub struct TapeRecord<T> {
    pub layer: usize,
    pub input_shape: Vec<usize>,
    pub saved: Vec<Tensor<T>>,
}

/// Forward-order log of layer records. Backward consumes it from the end,
/// so layers are revisited in exact reverse order.
#[derive(Clone, Debug, Default)]
pub struct GradTape<T> {
    records: Vec<TapeRecord<T>>,
}

impl<T> GradTape<T> {
    pub fn new() -> Self {
        Self { records: Vec::new() }
    }

    pub fn push(&mut self, layer: usize, input_shape: &[usize], saved: Vec<Tensor<T>>) {
        self.records.push(TapeRecord {
            layer,
            input_shape: input_shape.to_vec(),
            saved,
        });
    }

    pub fn pop(&mut self) -> Option<TapeRecord<T>> {
        self.records.pop()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Layer ids in forward order.
    pub fn layer_order(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.layer).collect()
    }

    pub fn clear(&mut self) {
        self.records.clear();
    }
}
