use submarket_lab::document::MarketSpecDocument;
use submarket_lab::generate::{random_claim, random_model, RandomModelConfig};
use submarket_lab::numeric::NumericMode;

fn main() {
    let model = random_model(&RandomModelConfig::small(), 11);
    let claim = random_claim(&model, 11);
    let doc = MarketSpecDocument::from_model(&model, &[claim], NumericMode::Rational);
    let text = doc.to_json();
    println!("{text}");
    let back = MarketSpecDocument::from_json(&text).unwrap().assemble().unwrap();
    assert_eq!(back.model, model);
    println!("round trip ok: {} atoms, {} submarkets", model.atom_count(), model.submarkets().len());
}
