fn main() {
    println!("sqg placeholder");
}
